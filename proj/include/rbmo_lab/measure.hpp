#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rbmo_lab {

enum class Metric { max_coordinate, euclidean };

/// Absolute slack on closed-cube membership and cube containment.
inline constexpr double kCubeTolerance = 1e-12;

using Point = std::vector<double>;

/// Closed axis-parallel cube Q(center, side).
struct Cube {
  Point center;
  double side = 0.0;

  bool operator==(const Cube&) const = default;
};

double chebyshev_distance(std::span<const double> a, std::span<const double> b) noexcept;
double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// |x - c|_inf <= side/2, boundary included.
bool cube_contains_point(const Cube& cube, std::span<const double> x) noexcept;

/// Finite list of weighted points in R^m carrying a growth exponent n.
/// Immutable once built; atoms keep their construction order and every sum
/// over atoms runs in that order.
class AtomicMeasure {
 public:
  AtomicMeasure(std::size_t ambient_dim, double dim_param, std::vector<double> coords,
                std::vector<double> masses, Metric metric = Metric::max_coordinate);

  std::size_t size() const noexcept { return masses_.size(); }
  std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  double dim_param() const noexcept { return dim_param_; }
  Metric metric() const noexcept { return metric_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * ambient_dim_, ambient_dim_};
  }
  double mass(std::size_t i) const noexcept { return masses_[i]; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double total_mass() const noexcept { return total_mass_; }

  /// dist(x, y) in the measure's declared metric.
  double distance(std::span<const double> a, std::span<const double> b) const noexcept;

  /// Largest pairwise distance in the given metric.
  double diameter(Metric metric = Metric::max_coordinate) const;
  /// Smallest positive pairwise distance in the given metric (0 for one atom).
  double min_gap(Metric metric = Metric::max_coordinate) const;

  /// Indices of atoms inside the closed cube, in atom order.
  std::vector<std::size_t> atoms_in(const Cube& cube) const;

  /// FNV-1a over dimensions, metric, coordinates and masses.
  std::uint64_t content_hash() const noexcept;

  AtomicMeasure with_metric(Metric metric) const;

 private:
  std::size_t ambient_dim_;
  double dim_param_;
  std::vector<double> coords_;
  std::vector<double> masses_;
  Metric metric_;
  double total_mass_ = 0.0;
};

struct UniformGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 1;
  /// Atoms lie on the first axis of R^embed_dim.
  std::size_t embed_dim = 1;
};

/// 4^depth atoms at the centers of the depth-level squares of the 1/4
/// four-corner construction on [0,1]^2, each of mass 4^-depth.
struct CantorFourCorner {
  int depth = 0;
};

/// Uniform light grid on [0,1] plus a heavy geometric cluster accumulating at
/// cluster_point from the right: the k-th cluster atom sits at
/// cluster_point + 2^-k / (4 base_count) with mass proportional to 2^-k.
struct TwoScale {
  std::size_t base_count = 64;
  std::size_t cluster_count = 8;
  double cluster_point = 0.5;
  double base_weight = 0.5;
};

struct Explicit {
  std::size_t ambient_dim = 1;
  double dim_param = 1.0;
  /// Each atom is its coordinates followed by its mass.
  std::vector<std::vector<double>> atoms;
};

using MeasureSpec = std::variant<UniformGrid, CantorFourCorner, TwoScale, Explicit>;

AtomicMeasure build_measure(const MeasureSpec& spec, Metric metric = Metric::max_coordinate);

/// Parses "uniform:lo,hi,count[,embed_dim]", "cantor:depth",
/// "twoscale:base,cluster,point,weight".
MeasureSpec parse_measure_spec(const std::string& text);

/// Mass of the closed cube.
double mu_cube(const AtomicMeasure& measure, const Cube& cube) noexcept;

/// max over the family of mu(Q) / side(Q)^n.
double ndim_constant(const AtomicMeasure& measure, std::span<const Cube> family);

}  // namespace rbmo_lab
