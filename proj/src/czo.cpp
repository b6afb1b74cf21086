#include "rbmo_lab/czo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <regex>

#include "parallel.hpp"
#include "rbmo_lab/error.hpp"

namespace rbmo_lab {

Kernel Kernel::cauchy(bool imaginary) {
  return imaginary ? Kernel(Kind::cauchy_im, "cauchy_im", 1.0, 1.0, true)
                   : Kernel(Kind::cauchy_re, "cauchy_re", 1.0, 1.0, true);
}

Kernel Kernel::riesz(double n) {
  if (!(n > 0.0)) throw Error(ErrorCode::invalid_spec, "riesz exponent must be positive");
  char buf[64];
  std::snprintf(buf, sizeof buf, "riesz(%g)", n);
  return Kernel(Kind::riesz, buf, n, 1.0, true);
}

Kernel Kernel::custom(std::string name, double n, double delta, bool antisymmetric, Evaluator evaluator) {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::invalid_spec, "kernel delta must lie in (0, 1]");
  return Kernel(Kind::custom, std::move(name), n, delta, antisymmetric, std::move(evaluator));
}

Kernel builtin_kernel(const std::string& name, const AtomicMeasure& measure) {
  if (name == "cauchy_re" || name == "cauchy_im") {
    if (measure.ambient_dim() != 2 || measure.dim_param() != 1.0) {
      throw Error(ErrorCode::dimension_mismatch, name + " needs a measure in R^2 with n = 1");
    }
    return Kernel::cauchy(name == "cauchy_im");
  }
  static const std::regex riesz_re(R"(riesz(?:\(([0-9.eE+-]+)\)|:([0-9.eE+-]+)))");
  std::smatch match;
  if (std::regex_match(name, match, riesz_re)) {
    const std::string digits = match[1].matched ? match[1].str() : match[2].str();
    double n = 0.0;
    try {
      n = std::stod(digits);
    } catch (const std::exception&) {
      throw Error(ErrorCode::unknown_kernel, "bad riesz exponent in '" + name + "'");
    }
    if (n != measure.dim_param()) {
      throw Error(ErrorCode::dimension_mismatch, name + " does not match the measure's n");
    }
    return Kernel::riesz(n);
  }
  throw Error(ErrorCode::unknown_kernel, "unknown kernel '" + name + "'");
}

std::vector<double> geometric_eps_grid(const AtomicMeasure& measure, int count) {
  if (count < 1) throw Error(ErrorCode::invalid_spec, "eps grid needs at least one point");
  const double top = measure.diameter(Metric::max_coordinate);
  const double bottom = measure.min_gap(Metric::max_coordinate);
  if (!(top > 0.0) || !(bottom > 0.0)) throw Error(ErrorCode::invalid_spec, "eps grid needs two or more atoms");
  std::vector<double> grid;
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    grid.push_back(top * std::pow(bottom / top, frac));
  }
  return grid;
}

namespace {

// Fixed draw pattern per sample so that a longer run extends a shorter one.
struct Draws {
  std::mt19937_64 rng;
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng() % n); }
  double unit() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
};

double pick_admissible(const Kernel& kernel, const AtomicMeasure& measure, std::size_t x1, std::size_t y,
                       double u, Metric metric, std::vector<std::size_t>& scratch, bool& found) {
  auto dist = [metric](std::span<const double> a, std::span<const double> b) {
    return metric == Metric::euclidean ? euclidean_distance(a, b) : chebyshev_distance(a, b);
  };
  const auto p1 = measure.point(x1);
  const auto py = measure.point(y);
  const double reach = dist(p1, py);
  scratch.clear();
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (i == x1 || i == y) continue;
    const double d = dist(p1, measure.point(i));
    if (d > 0.0 && 2.0 * d <= reach) scratch.push_back(i);
  }
  found = !scratch.empty();
  if (!found) return 0.0;
  const std::size_t x2 = scratch[std::min(scratch.size() - 1, static_cast<std::size_t>(u * scratch.size()))];
  const auto p2 = measure.point(x2);
  const double inc = std::abs(kernel(p1, py) - kernel(p2, py)) + std::abs(kernel(py, p1) - kernel(py, p2));
  const double d12 = dist(p1, p2);
  const double delta = kernel.delta();
  return inc * std::pow(reach, kernel.n() + delta) / std::pow(d12, delta);
}

}  // namespace

KernelReport kernel_condition_report(const Kernel& kernel, const AtomicMeasure& measure, std::size_t sample_count,
                                     std::uint64_t seed, std::span<const std::size_t> cancellation_centers) {
  if (sample_count < 1) throw Error(ErrorCode::invalid_spec, "sample_count must be >= 1");
  for (std::size_t c : cancellation_centers) {
    if (c >= measure.size()) throw Error(ErrorCode::invalid_spec, "cancellation center out of range");
  }
  KernelReport report;
  const std::size_t n_atoms = measure.size();
  if (n_atoms < 2) return report;
  const double span = measure.diameter(Metric::max_coordinate);
  const Metric declared = measure.metric();
  Draws draws{std::mt19937_64(seed)};
  std::vector<std::size_t> scratch;

  for (std::size_t s = 0; s < sample_count; ++s) {
    // size condition
    const std::size_t a = draws.index(n_atoms);
    const std::size_t b = draws.index(n_atoms);
    if (a != b) {
      const auto pa = measure.point(a);
      const auto pb = measure.point(b);
      const double k = std::abs(kernel(pa, pb));
      report.size_c = std::max(report.size_c, k * std::pow(measure.distance(pa, pb), kernel.n()));
      report.size_c_euclidean =
          std::max(report.size_c_euclidean, k * std::pow(euclidean_distance(pa, pb), kernel.n()));
      ++report.pairs;
    }

    // smoothness condition
    const std::size_t x1 = draws.index(n_atoms);
    const std::size_t y = draws.index(n_atoms);
    const double u_declared = draws.unit();
    const double u_euclid = draws.unit();
    if (x1 != y) {
      bool found = false;
      const double h = pick_admissible(kernel, measure, x1, y, u_declared, declared, scratch, found);
      if (found) {
        report.hoelder_c = std::max(report.hoelder_c, h);
        ++report.triples;
      }
      const double he = pick_admissible(kernel, measure, x1, y, u_euclid, Metric::euclidean, scratch, found);
      if (found) {
        report.hoelder_c_euclidean = std::max(report.hoelder_c_euclidean, he);
        ++report.triples_euclidean;
      }
    }

    // cancellation condition
    const std::size_t c_draw = draws.index(cancellation_centers.empty() ? n_atoms : cancellation_centers.size());
    const double big = draws.unit();
    const double small = draws.unit();
    const std::size_t center = cancellation_centers.empty() ? c_draw : cancellation_centers[c_draw];
    const double outer = 2.2 * span * (1.0 - big);
    const double inner = outer * (1.0 - small);
    if (inner > 0.0 && outer > inner) {
      const Cube big_cube{Point(measure.point(center).begin(), measure.point(center).end()), outer};
      const Cube small_cube{big_cube.center, inner};
      const auto px = measure.point(center);
      double sum = 0.0;
      for (std::size_t j = 0; j < n_atoms; ++j) {
        const auto py = measure.point(j);
        if (j == center || !cube_contains_point(big_cube, py) || cube_contains_point(small_cube, py)) continue;
        sum += kernel(px, py) * measure.mass(j);
      }
      report.cancellation_sup = std::max(report.cancellation_sup, std::abs(sum));
      ++report.annuli;
    }
  }
  return report;
}

double truncated_at(const Kernel& kernel, const AtomicMeasure& measure, std::span<const double> f, double eps,
                    std::size_t target, const std::function<bool(std::size_t)>& use_source) {
  const auto x = measure.point(target);
  const double reach = 0.5 * eps + kCubeTolerance;
  double sum = 0.0;
  for (std::size_t j = 0; j < measure.size(); ++j) {
    if (j == target || f[j] == 0.0) continue;
    const auto y = measure.point(j);
    if (chebyshev_distance(x, y) <= reach) continue;
    if (use_source && !use_source(j)) continue;
    sum += kernel(x, y) * f[j] * measure.mass(j);
  }
  return sum;
}

SampledFunction apply_truncated(const Kernel& kernel, const AtomicMeasure& measure, const SampledFunction& f,
                                double eps) {
  validate_function(measure, f);
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_spec, "truncation eps must be positive");
  SampledFunction out{std::vector<double>(measure.size(), 0.0)};
  detail::parallel_for(measure.size(), [&](std::size_t i) { out[i] = truncated_at(kernel, measure, f.values, eps, i); });
  return out;
}

SampledFunction t_one(const Kernel& kernel, const AtomicMeasure& measure, double eps) {
  return apply_truncated(kernel, measure, SampledFunction{std::vector<double>(measure.size(), 1.0)}, eps);
}

namespace {

// B = sqrt(m_x m_y) K(x,y) on pairs outside the truncation cube: the matrix of
// T_eps after the isometry f -> sqrt(m) f from L^2(mu) onto l^2.
class SymmetrizedOperator {
 public:
  SymmetrizedOperator(const Kernel& kernel, const AtomicMeasure& measure, double eps)
      : kernel_(kernel), measure_(measure), eps_(eps), n_(measure.size()) {
    root_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) root_[i] = std::sqrt(measure.mass(i));
    if (n_ <= kDenseLimit) {
      dense_.assign(n_ * n_, 0.0);
      detail::parallel_for(n_, [&](std::size_t i) {
        for (std::size_t j = 0; j < n_; ++j) dense_[i * n_ + j] = entry(i, j);
      });
    }
  }

  void apply(const std::vector<double>& v, std::vector<double>& out, bool transpose) const {
    out.assign(n_, 0.0);
    detail::parallel_for(n_, [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const double e = dense_.empty() ? (transpose ? entry(j, i) : entry(i, j))
                                        : (transpose ? dense_[j * n_ + i] : dense_[i * n_ + j]);
        s += e * v[j];
      }
      out[i] = s;
    });
  }

 private:
  static constexpr std::size_t kDenseLimit = 2048;

  double entry(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    const auto x = measure_.point(i);
    const auto y = measure_.point(j);
    if (chebyshev_distance(x, y) <= 0.5 * eps_ + kCubeTolerance) return 0.0;
    return root_[i] * kernel_(x, y) * root_[j];
  }

  const Kernel& kernel_;
  const AtomicMeasure& measure_;
  double eps_;
  std::size_t n_;
  std::vector<double> root_;
  std::vector<double> dense_;
};

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double l2_opnorm(const Kernel& kernel, const AtomicMeasure& measure, double eps, int iterations) {
  if (iterations < 1) throw Error(ErrorCode::invalid_spec, "iterations must be >= 1");
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_spec, "truncation eps must be positive");
  const std::size_t n = measure.size();
  const SymmetrizedOperator op(kernel, measure, eps);

  auto run = [&](std::vector<double> v) {
    const double start = norm2(v);
    for (double& x : v) x /= start;
    std::vector<double> w;
    std::vector<double> z;
    double sigma = 0.0;
    for (int it = 0; it < iterations; ++it) {
      op.apply(v, w, false);
      op.apply(w, z, true);
      const double sq = norm2(w);
      sigma = sq;
      const double zn = norm2(z);
      if (zn == 0.0) return 0.0;
      // Eigen-residual of T*T at the current Rayleigh quotient.
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = z[i] - sq * sq * v[i];
        res += r * r;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / zn;
      if (std::sqrt(res) <= 1e-10 * sq * sq) break;
    }
    op.apply(v, w, false);
    return std::max(sigma, norm2(w));
  };

  // f = 1 maps to sqrt(m) under the isometry.
  std::vector<double> ones(n);
  for (std::size_t i = 0; i < n; ++i) ones[i] = std::sqrt(measure.mass(i));
  const double first = run(std::move(ones));
  if (first > 0.0) return first;
  // The constant start can sit in the kernel of T; retry once.
  std::vector<double> alt(n);
  for (std::size_t i = 0; i < n; ++i) alt[i] = static_cast<double>(i % 7) + 1.0;
  return run(std::move(alt));
}

}  // namespace rbmo_lab
