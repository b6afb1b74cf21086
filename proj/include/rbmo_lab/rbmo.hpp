#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbmo_lab/geometry.hpp"
#include "rbmo_lab/measure.hpp"

namespace rbmo_lab {

/// One real value per atom, aligned with the measure's atom order.
struct SampledFunction {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  double& operator[](std::size_t i) noexcept { return values[i]; }
};

/// Throws LengthMismatch or InvalidSpec (non-finite value).
void validate_function(const AtomicMeasure& measure, const SampledFunction& f);

/// Which RBMO (semi-)norm an estimate belongs to.
enum class NormKind { A, B, C, D, E };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& text);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// mu-average of f over Q. ZeroMass if mu(Q) = 0.
double average(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q);

/// (1/mu(rho Q)) sum_{x in Q} |f(x) - t| mass(x). ZeroMass if mu(rho Q) = 0.
double oscillation(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double t,
                   double rho = 1.0);

/// The convex piecewise-linear map t -> (1/denominator) sum |v_i - t| w_i over
/// the atoms of one cube, kept sorted so that evaluation, the minimum and the
/// sublevel sets come from prefix sums instead of rescans.
class OscillationProfile {
 public:
  OscillationProfile(std::vector<double> values, std::vector<double> weights, double denominator);

  static OscillationProfile of_cube(const AtomicMeasure& measure, std::span<const double> f, const Cube& q,
                                    double rho);

  double operator()(double t) const noexcept;
  double minimum() const noexcept { return min_value_; }
  /// Minimizing set: the weighted median, or the median plateau.
  Interval argmin() const noexcept { return argmin_; }
  /// {t : value(t) <= bound}, or nullopt when bound is below the minimum.
  std::optional<Interval> sublevel(double bound) const noexcept;
  bool empty() const noexcept { return values_.empty(); }

 private:
  std::vector<double> values_;   // sorted, distinct
  std::vector<double> weights_;  // merged per distinct value
  std::vector<double> at_break_;
  double denominator_;
  double total_weight_ = 0.0;
  std::size_t min_index_ = 0;
  double min_value_ = 0.0;
  Interval argmin_;
  std::vector<double> prefix_w_;
  std::vector<double> prefix_wv_;
};

/// {t : oscillation(f, Q, t, rho) <= bound}, computed from the sorted profile.
std::optional<Interval> sublevel_interval(const AtomicMeasure& measure, const SampledFunction& f,
                                          const Cube& q, double bound, double rho);

/// Weighted median of f under the measure (midpoint of the plateau if any).
double weighted_median(const AtomicMeasure& measure, const SampledFunction& f);

struct NormEstimate {
  NormKind kind = NormKind::E;
  double rho = 1.0;
  double value = 0.0;
  /// Per family cube: f_Q for A/E, the average over Q (B: over Q-tilde) for
  /// B/C/D. Empty where the cube does not take part.
  std::vector<std::optional<double>> witness;
  CubeFamily family;
  /// Bisection steps (A/E) or 0.
  int iterations = 0;
  /// Cubes dropped because no doubling dilate was found (B only).
  std::size_t excluded = 0;
};

/// B(rho), C(rho), D in that order. NoDoublingCubes if the family has no doubling cube.
std::vector<NormEstimate> direct_norms(const AtomicMeasure& measure, const SampledFunction& f,
                                       const CubeFamily& family, double rho);

/// Smallest C with per-cube constants satisfying the oscillation bound on every
/// cube of the kind's family and |f_Q - f_R| <= C K(Q,R) on its nested pairs.
/// kind E: doubling cubes and rho = 1; kind A: all cubes with the given rho.
NormEstimate feasibility_norm(const AtomicMeasure& measure, const SampledFunction& f, const CubeFamily& family,
                              NormKind kind, double rho = 2.0);

struct JnProfile {
  std::vector<double> lambdas;
  /// mu{x in Q : |f(x) - f_Q| > lambda}.
  std::vector<double> masses;
  /// masses / mu(rho Q).
  std::vector<double> normalized;
  /// Least-squares fit log(mass) ~ intercept + slope * lambda over positive masses.
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double r_squared = 0.0;
  std::size_t fit_points = 0;
};

JnProfile jn_profile(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double f_q,
                     const std::vector<double>& lambdas, double rho);

/// ((1/mu(rho Q)) sum_{x in Q} |f - f_Q|^p mass)^(1/p).
double lp_oscillation(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double f_q, double p,
                      double rho);

}  // namespace rbmo_lab
