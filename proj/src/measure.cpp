#include "rbmo_lab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "rbmo_lab/error.hpp"

namespace rbmo_lab {

double chebyshev_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

bool cube_contains_point(const Cube& cube, std::span<const double> x) noexcept {
  const double half = 0.5 * cube.side + kCubeTolerance;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::abs(x[k] - cube.center[k]) > half) return false;
  }
  return true;
}

AtomicMeasure::AtomicMeasure(std::size_t ambient_dim, double dim_param, std::vector<double> coords,
                             std::vector<double> masses, Metric metric)
    : ambient_dim_(ambient_dim),
      dim_param_(dim_param),
      coords_(std::move(coords)),
      masses_(std::move(masses)),
      metric_(metric) {
  if (ambient_dim_ < 1) throw Error(ErrorCode::invalid_spec, "ambient dimension must be >= 1");
  if (!(dim_param_ > 0.0) || dim_param_ > static_cast<double>(ambient_dim_)) {
    throw Error(ErrorCode::invalid_spec, "dimension parameter must lie in (0, ambient_dim]");
  }
  if (masses_.empty()) throw Error(ErrorCode::invalid_spec, "measure has no atoms");
  if (coords_.size() != masses_.size() * ambient_dim_) {
    throw Error(ErrorCode::invalid_spec, "coordinate count does not match atom count");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::invalid_spec, "non-finite coordinate");
  }
  for (double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::invalid_spec, "atom masses must be positive");
    total_mass_ += m;
  }

  std::vector<std::size_t> order(masses_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [this](std::size_t a, std::size_t b) {
    const auto pa = point(a);
    const auto pb = point(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto pa = point(order[i - 1]);
    const auto pb = point(order[i]);
    if (std::equal(pa.begin(), pa.end(), pb.begin())) {
      std::ostringstream msg;
      msg << "duplicate atoms " << order[i - 1] << " and " << order[i];
      throw Error(ErrorCode::invalid_spec, msg.str());
    }
  }
}

double AtomicMeasure::distance(std::span<const double> a, std::span<const double> b) const noexcept {
  return metric_ == Metric::euclidean ? euclidean_distance(a, b) : chebyshev_distance(a, b);
}

double AtomicMeasure::diameter(Metric metric) const {
  if (metric == Metric::max_coordinate) {
    // Bounding-box extent is exact for the max metric.
    double d = 0.0;
    for (std::size_t k = 0; k < ambient_dim_; ++k) {
      double lo = coords_[k];
      double hi = coords_[k];
      for (std::size_t i = 1; i < size(); ++i) {
        lo = std::min(lo, coords_[i * ambient_dim_ + k]);
        hi = std::max(hi, coords_[i * ambient_dim_ + k]);
      }
      d = std::max(d, hi - lo);
    }
    return d;
  }
  double d = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) d = std::max(d, euclidean_distance(point(i), point(j)));
  }
  return d;
}

double AtomicMeasure::min_gap(Metric metric) const {
  double gap = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      const double d = metric == Metric::euclidean ? euclidean_distance(point(i), point(j))
                                                   : chebyshev_distance(point(i), point(j));
      if (d > 0.0 && (gap == 0.0 || d < gap)) gap = d;
    }
  }
  return gap;
}

std::vector<std::size_t> AtomicMeasure::atoms_in(const Cube& cube) const {
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < size(); ++i) {
    if (cube_contains_point(cube, point(i))) inside.push_back(i);
  }
  return inside;
}

namespace {

void fnv_mix(std::uint64_t& h, const void* data, std::size_t bytes) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

}  // namespace

std::uint64_t AtomicMeasure::content_hash() const noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  const std::uint64_t dim = ambient_dim_;
  const int metric = metric_ == Metric::euclidean ? 1 : 0;
  fnv_mix(h, &dim, sizeof dim);
  fnv_mix(h, &dim_param_, sizeof dim_param_);
  fnv_mix(h, &metric, sizeof metric);
  fnv_mix(h, coords_.data(), coords_.size() * sizeof(double));
  fnv_mix(h, masses_.data(), masses_.size() * sizeof(double));
  return h;
}

AtomicMeasure AtomicMeasure::with_metric(Metric metric) const {
  return AtomicMeasure(ambient_dim_, dim_param_, coords_, masses_, metric);
}

namespace {

AtomicMeasure build(const UniformGrid& g, Metric metric) {
  if (g.count < 1 || g.embed_dim < 1 || !(g.lo < g.hi)) {
    throw Error(ErrorCode::invalid_spec, "uniform grid needs count >= 1 and lo < hi");
  }
  std::vector<double> coords(g.count * g.embed_dim, 0.0);
  const double width = g.hi - g.lo;
  const double n = static_cast<double>(g.count);
  for (std::size_t i = 0; i < g.count; ++i) {
    coords[i * g.embed_dim] = g.lo + width * ((static_cast<double>(i) + 0.5) / n);
  }
  std::vector<double> masses(g.count, 1.0 / n);
  return AtomicMeasure(g.embed_dim, 1.0, std::move(coords), std::move(masses), metric);
}

void cantor_squares(double x, double y, double side, int depth, std::vector<double>& coords) {
  if (depth == 0) {
    coords.push_back(x + 0.5 * side);
    coords.push_back(y + 0.5 * side);
    return;
  }
  const double child = 0.25 * side;
  const double far = 0.75 * side;
  cantor_squares(x, y, child, depth - 1, coords);
  cantor_squares(x + far, y, child, depth - 1, coords);
  cantor_squares(x, y + far, child, depth - 1, coords);
  cantor_squares(x + far, y + far, child, depth - 1, coords);
}

AtomicMeasure build(const CantorFourCorner& c, Metric metric) {
  if (c.depth < 0 || c.depth > 10) throw Error(ErrorCode::invalid_spec, "cantor depth must lie in [0, 10]");
  std::vector<double> coords;
  cantor_squares(0.0, 0.0, 1.0, c.depth, coords);
  const std::size_t count = coords.size() / 2;
  std::vector<double> masses(count, std::ldexp(1.0, -2 * c.depth));
  return AtomicMeasure(2, 1.0, std::move(coords), std::move(masses), metric);
}

AtomicMeasure build(const TwoScale& t, Metric metric) {
  if (t.base_count < 1 || t.cluster_count < 1 || !(t.base_weight > 0.0 && t.base_weight < 1.0) ||
      !(t.cluster_point >= 0.0 && t.cluster_point < 1.0)) {
    throw Error(ErrorCode::invalid_spec, "two-scale needs counts >= 1, weight in (0,1), point in [0,1)");
  }
  const double n = static_cast<double>(t.base_count);
  std::vector<double> coords;
  std::vector<double> masses;
  for (std::size_t i = 0; i < t.base_count; ++i) {
    coords.push_back((static_cast<double>(i) + 0.5) / n);
    masses.push_back(t.base_weight / n);
  }
  const double cluster_norm = 1.0 - std::ldexp(1.0, -static_cast<int>(t.cluster_count));
  const double offset = 1.0 / (4.0 * n);
  for (std::size_t k = 1; k <= t.cluster_count; ++k) {
    const double scale = std::ldexp(1.0, -static_cast<int>(k));
    coords.push_back(t.cluster_point + scale * offset);
    masses.push_back((1.0 - t.base_weight) * scale / cluster_norm);
  }
  return AtomicMeasure(1, 1.0, std::move(coords), std::move(masses), metric);
}

AtomicMeasure build(const Explicit& e, Metric metric) {
  std::vector<double> coords;
  std::vector<double> masses;
  for (const auto& atom : e.atoms) {
    if (atom.size() != e.ambient_dim + 1) {
      throw Error(ErrorCode::invalid_spec, "explicit atom must list ambient_dim coordinates and a mass");
    }
    coords.insert(coords.end(), atom.begin(), atom.end() - 1);
    masses.push_back(atom.back());
  }
  return AtomicMeasure(e.ambient_dim, e.dim_param, std::move(coords), std::move(masses), metric);
}

std::vector<double> split_numbers(const std::string& body) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_spec, "bad number '" + item + "' in measure spec");
    }
  }
  return out;
}

std::size_t as_count(double v) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) {
    throw Error(ErrorCode::invalid_spec, "expected a nonnegative integer in measure spec");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

AtomicMeasure build_measure(const MeasureSpec& spec, Metric metric) {
  return std::visit([metric](const auto& s) { return build(s, metric); }, spec);
}

MeasureSpec parse_measure_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::invalid_spec, "measure spec needs 'kind:params'");
  const std::string kind = text.substr(0, colon);
  const auto nums = split_numbers(text.substr(colon + 1));
  if (kind == "uniform") {
    if (nums.size() != 3 && nums.size() != 4) throw Error(ErrorCode::invalid_spec, "uniform:lo,hi,count[,embed_dim]");
    return UniformGrid{nums[0], nums[1], as_count(nums[2]), nums.size() == 4 ? as_count(nums[3]) : 1};
  }
  if (kind == "cantor") {
    if (nums.size() != 1) throw Error(ErrorCode::invalid_spec, "cantor:depth");
    return CantorFourCorner{static_cast<int>(as_count(nums[0]))};
  }
  if (kind == "twoscale") {
    if (nums.size() != 4) throw Error(ErrorCode::invalid_spec, "twoscale:base,cluster,point,weight");
    return TwoScale{as_count(nums[0]), as_count(nums[1]), nums[2], nums[3]};
  }
  throw Error(ErrorCode::invalid_spec, "unknown measure kind '" + kind + "'");
}

double mu_cube(const AtomicMeasure& measure, const Cube& cube) noexcept {
  double total = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (cube_contains_point(cube, measure.point(i))) total += measure.mass(i);
  }
  return total;
}

double ndim_constant(const AtomicMeasure& measure, std::span<const Cube> family) {
  if (family.empty()) throw Error(ErrorCode::empty_family, "ndim_constant needs at least one cube");
  double best = 0.0;
  for (const auto& q : family) {
    if (!(q.side > 0.0)) throw Error(ErrorCode::invalid_spec, "cube side must be positive");
    best = std::max(best, mu_cube(measure, q) / std::pow(q.side, measure.dim_param()));
  }
  return best;
}

}  // namespace rbmo_lab
