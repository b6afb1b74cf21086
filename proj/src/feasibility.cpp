// Min-max norm estimation for the A and E norms.
//
// At a fixed level C every cube contributes the interval {t : osc(f,Q,t) <= C}
// and every nested pair the two-sided constraint |x_Q - x_R| <= C K(Q,R).
// Pair weights are nonnegative, so the greatest assignment below the interval
// tops is a multi-source shortest-path problem (Dijkstra seeded with the
// tops); the system is feasible iff that assignment stays above every
// interval bottom. Bisection on C then finds the smallest feasible level.

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <utility>

#include "rbmo_lab/error.hpp"
#include "rbmo_lab/rbmo.hpp"

namespace rbmo_lab {
namespace {

constexpr double kRelativeWidth = 1e-12;
constexpr int kMaxBisections = 80;

struct Arc {
  std::size_t to;
  double k;
};

class DifferenceSystem {
 public:
  DifferenceSystem(std::vector<OscillationProfile> profiles, std::vector<std::vector<Arc>> adjacency)
      : profiles_(std::move(profiles)), adjacency_(std::move(adjacency)) {}

  std::size_t size() const noexcept { return profiles_.size(); }
  const OscillationProfile& profile(std::size_t i) const { return profiles_[i]; }

  /// Interval bounds at level c, or false if some cube admits no constant.
  bool bounds(double c, std::vector<double>& lo, std::vector<double>& hi) const {
    lo.resize(size());
    hi.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto iv = profiles_[i].sublevel(c);
      if (!iv) return false;
      lo[i] = iv->lo;
      hi[i] = iv->hi;
    }
    return true;
  }

  /// Greatest x <= hi with |x_a - x_b| <= c K on every arc; nullopt if it dips below lo.
  std::optional<std::vector<double>> upper(const std::vector<double>& lo, const std::vector<double>& hi,
                                           double c) const {
    std::vector<double> x = hi;
    std::vector<bool> done(size(), false);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    for (std::size_t i = 0; i < size(); ++i) queue.emplace(x[i], i);
    while (!queue.empty()) {
      const auto [key, u] = queue.top();
      queue.pop();
      if (done[u] || key > x[u]) continue;
      done[u] = true;
      if (x[u] < lo[u]) return std::nullopt;
      for (const auto& arc : adjacency_[u]) {
        const double cand = x[u] + c * arc.k;
        if (cand < x[arc.to]) {
          x[arc.to] = cand;
          queue.emplace(cand, arc.to);
        }
      }
    }
    return x;
  }

  bool feasible(double c) const {
    std::vector<double> lo;
    std::vector<double> hi;
    return bounds(c, lo, hi) && upper(lo, hi, c).has_value();
  }

  /// Midpoint of the greatest and least feasible assignments (both exist when feasible).
  std::optional<std::vector<double>> witness(double c) const {
    std::vector<double> lo;
    std::vector<double> hi;
    if (!bounds(c, lo, hi)) return std::nullopt;
    auto top = upper(lo, hi, c);
    if (!top) return std::nullopt;
    std::vector<double> neg_lo(size());
    std::vector<double> neg_hi(size());
    for (std::size_t i = 0; i < size(); ++i) {
      neg_lo[i] = -hi[i];
      neg_hi[i] = -lo[i];
    }
    auto bottom = upper(neg_lo, neg_hi, c);
    if (!bottom) return std::nullopt;
    std::vector<double> mid(size());
    for (std::size_t i = 0; i < size(); ++i) mid[i] = 0.5 * ((*top)[i] - (*bottom)[i]);
    return mid;
  }

 private:
  std::vector<OscillationProfile> profiles_;
  std::vector<std::vector<Arc>> adjacency_;
};

}  // namespace

NormEstimate feasibility_norm(const AtomicMeasure& measure, const SampledFunction& f, const CubeFamily& family,
                              NormKind kind, double rho) {
  validate_function(measure, f);
  if (kind != NormKind::A && kind != NormKind::E) {
    throw Error(ErrorCode::invalid_spec, "feasibility_norm handles the A and E norms only");
  }
  if (kind == NormKind::A && !(rho >= 1.0)) throw Error(ErrorCode::invalid_spec, "A norm needs rho >= 1");
  const double rho_used = kind == NormKind::E ? 1.0 : rho;

  std::vector<std::size_t> members;
  std::vector<std::size_t> pairs;
  if (kind == NormKind::E) {
    members = family.doubling_indices();
    if (members.empty()) throw Error(ErrorCode::no_doubling_cubes, "family has no doubling cube");
    pairs = family.doubling_pair_indices();
  } else {
    members.resize(family.size());
    for (std::size_t i = 0; i < family.size(); ++i) members[i] = i;
    pairs.resize(family.nested_pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) pairs[p] = p;
  }

  NormEstimate out;
  out.kind = kind;
  out.rho = rho_used;
  out.family = family;
  out.witness.assign(family.size(), std::nullopt);

  // Work in units centred at the global weighted median and scaled by the
  // oscillation there, so the bisection is the same for c f + d.
  const double center = weighted_median(measure, f);
  std::vector<double> shifted(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) shifted[i] = f[i] - center;
  double scale = 0.0;
  for (std::size_t m : members) {
    scale = std::max(scale, OscillationProfile::of_cube(measure, shifted, family.cubes[m], rho_used)(0.0));
  }
  if (scale == 0.0) {
    out.value = 0.0;
    for (std::size_t m : members) out.witness[m] = center;
    return out;
  }
  for (double& v : shifted) v /= scale;

  std::vector<std::size_t> local(family.size(), family.size());
  for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = i;
  std::vector<OscillationProfile> profiles;
  profiles.reserve(members.size());
  double top = 0.0;
  for (std::size_t m : members) {
    profiles.push_back(OscillationProfile::of_cube(measure, shifted, family.cubes[m], rho_used));
    top = std::max(top, profiles.back()(0.0));
  }
  std::vector<std::vector<Arc>> adjacency(members.size());
  for (std::size_t p : pairs) {
    const auto [i, j] = family.nested_pairs[p];
    adjacency[local[i]].push_back({local[j], family.pair_k[p]});
    adjacency[local[j]].push_back({local[i], family.pair_k[p]});
  }
  const DifferenceSystem system(std::move(profiles), std::move(adjacency));

  double lo = 0.0;
  double hi = top;
  if (!system.feasible(hi)) {
    throw Error(ErrorCode::infeasible_at_upper_bound, "constant witness at the weighted median was rejected");
  }
  if (system.feasible(0.0)) {
    hi = 0.0;
  } else {
    while (hi - lo > kRelativeWidth * hi && out.iterations < kMaxBisections) {
      const double mid = 0.5 * (lo + hi);
      if (system.feasible(mid)) hi = mid; else lo = mid;
      ++out.iterations;
    }
  }
  const auto w = system.witness(hi);
  if (!w) throw Error(ErrorCode::infeasible_at_upper_bound, "no witness at the final feasible level");
  out.value = scale * hi;
  for (std::size_t i = 0; i < members.size(); ++i) out.witness[members[i]] = center + scale * (*w)[i];
  return out;
}

}  // namespace rbmo_lab
