#include "rbmo_lab/rbmo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rbmo_lab/error.hpp"

namespace rbmo_lab {

void validate_function(const AtomicMeasure& measure, const SampledFunction& f) {
  if (f.size() != measure.size()) {
    throw Error(ErrorCode::length_mismatch, "function has " + std::to_string(f.size()) + " values for " +
                                                std::to_string(measure.size()) + " atoms");
  }
  for (double v : f.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_spec, "function values must be finite");
  }
}

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::A: return "A";
    case NormKind::B: return "B";
    case NormKind::C: return "C";
    case NormKind::D: return "D";
    case NormKind::E: return "E";
  }
  return "?";
}

NormKind parse_norm_kind(const std::string& text) {
  if (text == "A") return NormKind::A;
  if (text == "B") return NormKind::B;
  if (text == "C") return NormKind::C;
  if (text == "D") return NormKind::D;
  if (text == "E") return NormKind::E;
  throw Error(ErrorCode::invalid_spec, "unknown norm tag '" + text + "'");
}

double average(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q) {
  double mass = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (!cube_contains_point(q, measure.point(i))) continue;
    mass += measure.mass(i);
    sum += f[i] * measure.mass(i);
  }
  if (mass <= 0.0) throw Error(ErrorCode::zero_mass, "average over an empty cube");
  return sum / mass;
}

double oscillation(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double t, double rho) {
  const double denom = mu_cube(measure, Cube{q.center, rho * q.side});
  if (denom <= 0.0) throw Error(ErrorCode::zero_mass, "oscillation over a cube with mu(rho Q) = 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (cube_contains_point(q, measure.point(i))) sum += std::abs(f[i] - t) * measure.mass(i);
  }
  return sum / denom;
}

OscillationProfile::OscillationProfile(std::vector<double> values, std::vector<double> weights, double denominator)
    : denominator_(denominator) {
  if (!(denominator > 0.0)) throw Error(ErrorCode::zero_mass, "oscillation denominator must be positive");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  for (std::size_t idx : order) {
    if (!values_.empty() && values_.back() == values[idx]) {
      weights_.back() += weights[idx];
    } else {
      values_.push_back(values[idx]);
      weights_.push_back(weights[idx]);
    }
  }
  const std::size_t k = values_.size();
  prefix_w_.assign(k + 1, 0.0);
  prefix_wv_.assign(k + 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    prefix_w_[i + 1] = prefix_w_[i] + weights_[i];
    prefix_wv_[i + 1] = prefix_wv_[i] + weights_[i] * values_[i];
  }
  total_weight_ = prefix_w_[k];
  if (k == 0) {
    const double inf = std::numeric_limits<double>::infinity();
    argmin_ = {-inf, inf};
    return;
  }
  at_break_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = values_[i];
    const double left = t * prefix_w_[i] - prefix_wv_[i];
    const double right = (prefix_wv_[k] - prefix_wv_[i + 1]) - t * (total_weight_ - prefix_w_[i + 1]);
    at_break_[i] = std::max(0.0, left + right) / denominator_;
  }
  const double half = 0.5 * total_weight_;
  std::size_t m = 0;
  while (m + 1 < k && prefix_w_[m + 1] < half) ++m;
  min_index_ = m;
  min_value_ = at_break_[m];
  if (prefix_w_[m + 1] == half && m + 1 < k) {
    argmin_ = {values_[m], values_[m + 1]};
  } else {
    argmin_ = {values_[m], values_[m]};
  }
}

OscillationProfile OscillationProfile::of_cube(const AtomicMeasure& measure, std::span<const double> f,
                                               const Cube& q, double rho) {
  std::vector<double> values;
  std::vector<double> weights;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (!cube_contains_point(q, measure.point(i))) continue;
    values.push_back(f[i]);
    weights.push_back(measure.mass(i));
  }
  const double denom = rho == 1.0 ? std::accumulate(weights.begin(), weights.end(), 0.0)
                                  : mu_cube(measure, Cube{q.center, rho * q.side});
  return OscillationProfile(std::move(values), std::move(weights), denom);
}

double OscillationProfile::operator()(double t) const noexcept {
  const std::size_t k = values_.size();
  const auto idx = static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), t) - values_.begin());
  const double left = t * prefix_w_[idx] - prefix_wv_[idx];
  const double right = (prefix_wv_[k] - prefix_wv_[idx]) - t * (total_weight_ - prefix_w_[idx]);
  return std::max(0.0, left + right) / denominator_;
}

std::optional<Interval> OscillationProfile::sublevel(double bound) const noexcept {
  const std::size_t k = values_.size();
  if (k == 0) {
    if (bound < 0.0) return std::nullopt;
    return argmin_;
  }
  if (bound < min_value_) return std::nullopt;
  const double slope = total_weight_ / denominator_;

  // at_break_ is nonincreasing on [0, min_index_].
  std::size_t i = min_index_;
  {
    std::size_t lo = 0;
    std::size_t hi = min_index_;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (at_break_[mid] <= bound) hi = mid; else lo = mid + 1;
    }
    i = lo;
  }
  double left;
  if (i == 0) {
    left = values_[0] - (bound - at_break_[0]) / slope;
  } else {
    const double g0 = at_break_[i - 1];
    const double g1 = at_break_[i];
    left = values_[i] - (bound - g1) / (g0 - g1) * (values_[i] - values_[i - 1]);
  }

  // Nondecreasing on [start, k).
  std::size_t start = min_index_;
  if (min_index_ + 1 < k && argmin_.hi > argmin_.lo && at_break_[min_index_ + 1] <= bound) start = min_index_ + 1;
  std::size_t j;
  {
    std::size_t lo = start;
    std::size_t hi = k - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (at_break_[mid] <= bound) lo = mid; else hi = mid - 1;
    }
    j = lo;
  }
  double right;
  if (j + 1 == k) {
    right = values_[k - 1] + (bound - at_break_[k - 1]) / slope;
  } else {
    const double g0 = at_break_[j];
    const double g1 = at_break_[j + 1];
    right = values_[j] + (bound - g0) / (g1 - g0) * (values_[j + 1] - values_[j]);
  }
  return Interval{std::min(left, values_[i]), std::max(right, values_[j])};
}

std::optional<Interval> sublevel_interval(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q,
                                          double bound, double rho) {
  return OscillationProfile::of_cube(measure, f.values, q, rho).sublevel(bound);
}

double weighted_median(const AtomicMeasure& measure, const SampledFunction& f) {
  OscillationProfile profile(f.values, measure.masses(), measure.total_mass());
  const auto range = profile.argmin();
  return 0.5 * (range.lo + range.hi);
}

namespace {

struct CubeStats {
  std::vector<std::vector<std::size_t>> atoms;
  std::vector<double> mass;
  std::vector<double> avg;
};

CubeStats cube_stats(const AtomicMeasure& measure, const SampledFunction& f, const CubeFamily& family) {
  CubeStats s;
  for (const auto& q : family.cubes) {
    auto idx = measure.atoms_in(q);
    double mass = 0.0;
    double sum = 0.0;
    for (std::size_t i : idx) {
      mass += measure.mass(i);
      sum += f[i] * measure.mass(i);
    }
    if (mass <= 0.0) throw Error(ErrorCode::zero_mass, "family cube with zero mass");
    s.atoms.push_back(std::move(idx));
    s.mass.push_back(mass);
    s.avg.push_back(sum / mass);
  }
  return s;
}

double abs_dev(const AtomicMeasure& measure, const SampledFunction& f, const std::vector<std::size_t>& atoms,
               double t) {
  double sum = 0.0;
  for (std::size_t i : atoms) sum += std::abs(f[i] - t) * measure.mass(i);
  return sum;
}

}  // namespace

std::vector<NormEstimate> direct_norms(const AtomicMeasure& measure, const SampledFunction& f,
                                       const CubeFamily& family, double rho) {
  validate_function(measure, f);
  if (!(rho > 1.0)) throw Error(ErrorCode::invalid_spec, "B and C norms need rho > 1");
  if (family.doubling_indices().empty()) throw Error(ErrorCode::no_doubling_cubes, "family has no doubling cube");
  const auto stats = cube_stats(measure, f, family);
  const std::size_t count = family.size();
  std::vector<double> rho_mass(count);
  for (std::size_t i = 0; i < count; ++i) rho_mass[i] = mu_cube(measure, dilate(family.cubes[i], rho));
  const auto doubling_pairs = family.doubling_pair_indices();

  NormEstimate b{NormKind::B, rho, 0.0, std::vector<std::optional<double>>(count), family};
  for (std::size_t i = 0; i < count; ++i) {
    Cube tilde;
    try {
      tilde = smallest_doubling_dilate(measure, family.cubes[i], family.params, 64);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::not_found) throw;
      ++b.excluded;
      continue;
    }
    const double avg = average(measure, f, tilde);
    b.witness[i] = avg;
    b.value = std::max(b.value, abs_dev(measure, f, stats.atoms[i], avg) / rho_mass[i]);
  }
  for (std::size_t p : doubling_pairs) {
    const auto [i, j] = family.nested_pairs[p];
    b.value = std::max(b.value, std::abs(stats.avg[i] - stats.avg[j]) / family.pair_k[p]);
  }

  NormEstimate c{NormKind::C, rho, 0.0, std::vector<std::optional<double>>(count), family};
  for (std::size_t i = 0; i < count; ++i) {
    c.witness[i] = stats.avg[i];
    c.value = std::max(c.value, abs_dev(measure, f, stats.atoms[i], stats.avg[i]) / rho_mass[i]);
  }
  for (std::size_t p = 0; p < family.nested_pairs.size(); ++p) {
    const auto [i, j] = family.nested_pairs[p];
    const double spread = rho_mass[i] / stats.mass[i] + rho_mass[j] / stats.mass[j];
    c.value = std::max(c.value, std::abs(stats.avg[i] - stats.avg[j]) / (family.pair_k[p] * spread));
  }

  NormEstimate d{NormKind::D, 1.0, 0.0, std::vector<std::optional<double>>(count), family};
  for (std::size_t i : family.doubling_indices()) {
    d.witness[i] = stats.avg[i];
    d.value = std::max(d.value, abs_dev(measure, f, stats.atoms[i], stats.avg[i]) / stats.mass[i]);
  }
  for (std::size_t p : doubling_pairs) {
    const auto [i, j] = family.nested_pairs[p];
    d.value = std::max(d.value, std::abs(stats.avg[i] - stats.avg[j]) / family.pair_k[p]);
  }

  return {std::move(b), std::move(c), std::move(d)};
}

JnProfile jn_profile(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double f_q,
                     const std::vector<double>& lambdas, double rho) {
  validate_function(measure, f);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0) || (k > 0 && !(lambdas[k] > lambdas[k - 1]))) {
      throw Error(ErrorCode::invalid_spec, "lambdas must be positive and increasing");
    }
  }
  const double denom = mu_cube(measure, dilate(q, rho));
  const auto atoms = measure.atoms_in(q);
  JnProfile out;
  out.lambdas = lambdas;
  for (double lambda : lambdas) {
    double mass = 0.0;
    for (std::size_t i : atoms) {
      if (std::abs(f[i] - f_q) > lambda) mass += measure.mass(i);
    }
    out.masses.push_back(mass);
    out.normalized.push_back(denom > 0.0 ? mass / denom : 0.0);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (out.masses[k] > 0.0) {
      xs.push_back(lambdas[k]);
      ys.push_back(std::log(out.masses[k]));
    }
  }
  out.fit_points = xs.size();
  if (xs.size() < 2) return out;
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (out.intercept + out.slope * xs[k]);
    out.residual += r * r;
  }
  out.r_squared = syy > 0.0 ? 1.0 - out.residual / syy : 1.0;
  return out;
}

double lp_oscillation(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double f_q, double p,
                      double rho) {
  if (!(p >= 1.0)) throw Error(ErrorCode::invalid_spec, "exponent p must be >= 1");
  const double denom = mu_cube(measure, dilate(q, rho));
  if (denom <= 0.0) throw Error(ErrorCode::zero_mass, "L^p oscillation over a cube with mu(rho Q) = 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (cube_contains_point(q, measure.point(i))) sum += std::pow(std::abs(f[i] - f_q), p) * measure.mass(i);
  }
  return std::pow(sum / denom, 1.0 / p);
}

}  // namespace rbmo_lab
