#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rbmo_lab/measure.hpp"
#include "rbmo_lab/rbmo.hpp"

namespace rbmo_lab {

/// Real Calderon-Zygmund kernel K(x, y), defined off the diagonal.
class Kernel {
 public:
  enum class Kind { cauchy_re, cauchy_im, riesz, custom };
  using Evaluator = std::function<double(std::span<const double>, std::span<const double>)>;

  /// Re or Im of 1/(z - w) with z = x0 + i x1; n = 1, delta = 1.
  static Kernel cauchy(bool imaginary);
  /// (x0 - y0) / |x - y|^(n+1) in the euclidean norm; delta = 1.
  static Kernel riesz(double n);
  static Kernel custom(std::string name, double n, double delta, bool antisymmetric, Evaluator evaluator);

  double operator()(std::span<const double> x, std::span<const double> y) const {
    switch (kind_) {
      case Kind::cauchy_re: {
        const double a = x[0] - y[0];
        const double b = x[1] - y[1];
        return a / (a * a + b * b);
      }
      case Kind::cauchy_im: {
        const double a = x[0] - y[0];
        const double b = x[1] - y[1];
        return -b / (a * a + b * b);
      }
      case Kind::riesz: {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
        return (x[0] - y[0]) / std::pow(s, 0.5 * (n_ + 1.0));
      }
      case Kind::custom:
        return evaluator_(x, y);
    }
    return 0.0;
  }

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double n() const noexcept { return n_; }
  double delta() const noexcept { return delta_; }
  bool antisymmetric() const noexcept { return antisymmetric_; }

 private:
  Kernel(Kind kind, std::string name, double n, double delta, bool antisymmetric, Evaluator evaluator = {})
      : kind_(kind), name_(std::move(name)), n_(n), delta_(delta), antisymmetric_(antisymmetric),
        evaluator_(std::move(evaluator)) {}

  Kind kind_;
  std::string name_;
  double n_;
  double delta_;
  bool antisymmetric_;
  Evaluator evaluator_;
};

/// "cauchy_re", "cauchy_im", "riesz(n)" or "riesz:n". UnknownKernel for other
/// names; DimensionMismatch when the kernel does not fit the measure (Cauchy
/// kernels need m = 2 and n = 1, Riesz kernels need n = dim_param).
Kernel builtin_kernel(const std::string& name, const AtomicMeasure& measure);

/// Decreasing geometric grid of `count` truncation sizes from the diameter
/// down to the minimum atom gap (both in the max-coordinate metric).
std::vector<double> geometric_eps_grid(const AtomicMeasure& measure, int count);

struct KernelReport {
  /// max |K(x,y)| dist(x,y)^n over sampled atom pairs, measure metric.
  double size_c = 0.0;
  /// Same with euclidean distances.
  double size_c_euclidean = 0.0;
  /// Normalized Hoelder increments over sampled admissible triples, measure metric.
  double hoelder_c = 0.0;
  double hoelder_c_euclidean = 0.0;
  /// max over sampled (x, r < R) of |sum_{y in Q(x,R) \ Q(x,r)} K(x,y) mass(y)|.
  double cancellation_sup = 0.0;
  std::size_t pairs = 0;
  std::size_t triples = 0;
  std::size_t triples_euclidean = 0;
  std::size_t annuli = 0;
};

/// Sampled constants for the size, smoothness and cancellation conditions.
/// Deterministic given the seed; with a fixed seed, more samples only extend
/// the sequence. Annuli are centred at `cancellation_centers` when given,
/// otherwise at random atoms.
KernelReport kernel_condition_report(const Kernel& kernel, const AtomicMeasure& measure, std::size_t sample_count,
                                     std::uint64_t seed, std::span<const std::size_t> cancellation_centers = {});

/// T_eps f(x) = sum over atoms y outside the closed cube Q(x, eps) of K(x,y) f(y) mass(y).
SampledFunction apply_truncated(const Kernel& kernel, const AtomicMeasure& measure, const SampledFunction& f,
                                double eps);

/// T_eps f at one atom, restricted to sources accepted by `use_source`.
double truncated_at(const Kernel& kernel, const AtomicMeasure& measure, std::span<const double> f, double eps,
                    std::size_t target, const std::function<bool(std::size_t)>& use_source = {});

SampledFunction t_one(const Kernel& kernel, const AtomicMeasure& measure, double eps);

/// Largest singular value of f -> T_eps f on L^2(mu), by power iteration on
/// T* T from the normalized all-ones start. Stops early once the eigen-residual
/// of T* T drops below 1e-10 relative.
double l2_opnorm(const Kernel& kernel, const AtomicMeasure& measure, double eps, int iterations);

}  // namespace rbmo_lab
