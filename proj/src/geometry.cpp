#include "rbmo_lab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rbmo_lab/error.hpp"

namespace rbmo_lab {

DoublingParams DoublingParams::defaults(std::size_t ambient_dim) {
  return DoublingParams{4.0, 2.0 * std::pow(4.0, static_cast<double>(ambient_dim + 1))};
}

void DoublingParams::validate(double dim_param) const {
  if (!(alpha > 1.0)) throw Error(ErrorCode::invalid_spec, "doubling alpha must exceed 1");
  if (!(beta > std::pow(alpha, dim_param))) {
    throw Error(ErrorCode::invalid_spec, "doubling beta must exceed alpha^n");
  }
}

Cube dilate(const Cube& cube, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_spec, "dilation factor must be positive");
  return Cube{cube.center, lambda * cube.side};
}

bool cube_contains(const Cube& outer, const Cube& inner) noexcept {
  const double ho = 0.5 * outer.side;
  const double hi = 0.5 * inner.side;
  for (std::size_t k = 0; k < outer.center.size(); ++k) {
    if (inner.center[k] - hi < outer.center[k] - ho - kCubeTolerance) return false;
    if (inner.center[k] + hi > outer.center[k] + ho + kCubeTolerance) return false;
  }
  return true;
}

int dyadic_steps(double inner_side, double outer_side) {
  if (!(inner_side > 0.0) || !(outer_side > 0.0)) {
    throw Error(ErrorCode::invalid_spec, "cube sides must be positive");
  }
  int k = 0;
  // ldexp is exact, so powers-of-two ratios land on the exact step.
  while (std::ldexp(inner_side, k) < outer_side * (1.0 - 1e-12)) ++k;
  return k;
}

double k_sum(const AtomicMeasure& measure, const Cube& q, int steps) {
  double k = 1.0;
  for (int j = 1; j <= steps; ++j) {
    const Cube d{q.center, std::ldexp(q.side, j)};
    k += mu_cube(measure, d) / std::pow(d.side, measure.dim_param());
  }
  return k;
}

double k_coefficient(const AtomicMeasure& measure, const Cube& q, const Cube& r) {
  if (!cube_contains(r, q)) throw Error(ErrorCode::not_nested, "K(Q,R) requires Q inside R");
  return k_sum(measure, q, dyadic_steps(q.side, r.side));
}

int k_cap_steps(const AtomicMeasure& measure, const Cube& q) {
  if (!(q.side > 0.0)) throw Error(ErrorCode::invalid_spec, "cube side must be positive");
  const double half = 0.5 * measure.total_mass();
  for (int k = 1; k < 2048; ++k) {
    if (mu_cube(measure, Cube{q.center, std::ldexp(q.side, k)}) > half) return k;
  }
  throw Error(ErrorCode::not_found, "no dilate carries more than half of the mass");
}

double k_cap(const AtomicMeasure& measure, const Cube& q) {
  return k_sum(measure, q, k_cap_steps(measure, q));
}

bool is_doubling(const AtomicMeasure& measure, const Cube& q, const DoublingParams& params) {
  const double inner = mu_cube(measure, q);
  if (inner <= 0.0) return false;
  return mu_cube(measure, Cube{q.center, params.alpha * q.side}) < params.beta * inner;
}

Cube smallest_doubling_dilate(const AtomicMeasure& measure, const Cube& q, const DoublingParams& params,
                              int max_steps) {
  if (max_steps < 1) throw Error(ErrorCode::invalid_spec, "max_steps must be >= 1");
  Cube current = q;
  std::ostringstream trace;
  for (int step = 0; step < max_steps; ++step) {
    const double inner = mu_cube(measure, current);
    const double outer = mu_cube(measure, Cube{current.center, params.alpha * current.side});
    if (inner > 0.0 && outer < params.beta * inner) return current;
    trace << (step ? ", " : "") << (inner > 0.0 ? outer / inner : INFINITY);
    current.side *= params.alpha;
  }
  throw Error(ErrorCode::not_found, "no doubling dilate within max_steps; ratios [" + trace.str() + "]");
}

std::vector<std::size_t> CubeFamily::doubling_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (doubling[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CubeFamily::doubling_pair_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < nested_pairs.size(); ++p) {
    if (doubling[nested_pairs[p].first] && doubling[nested_pairs[p].second]) out.push_back(p);
  }
  return out;
}

CubeFamily make_family(const AtomicMeasure& measure, std::vector<Cube> cubes, const DoublingParams& params,
                       FamilyParams provenance) {
  params.validate(measure.dim_param());
  CubeFamily family;
  family.params = params;
  family.provenance = std::move(provenance);
  for (auto& q : cubes) {
    if (q.center.size() != measure.ambient_dim()) {
      throw Error(ErrorCode::dimension_mismatch, "cube center dimension differs from the measure");
    }
    if (!(q.side > 0.0)) throw Error(ErrorCode::invalid_spec, "cube side must be positive");
    const double m = mu_cube(measure, q);
    if (m <= 0.0) continue;
    family.masses.push_back(m);
    family.doubling.push_back(is_doubling(measure, q, params));
    family.cubes.push_back(std::move(q));
  }
  if (family.cubes.empty()) throw Error(ErrorCode::empty_family, "no cube of positive measure");

  const std::size_t count = family.cubes.size();
  // Dilate terms per cube, reused by every pair that starts at that cube.
  std::vector<std::vector<double>> prefix(count);
  auto k_for = [&](std::size_t i, int steps) {
    auto& pre = prefix[i];
    if (pre.empty()) pre.push_back(1.0);
    while (static_cast<int>(pre.size()) <= steps) {
      const int j = static_cast<int>(pre.size());
      const Cube d{family.cubes[i].center, std::ldexp(family.cubes[i].side, j)};
      pre.push_back(pre.back() + mu_cube(measure, d) / std::pow(d.side, measure.dim_param()));
    }
    return pre[steps];
  };
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      if (i == j) continue;
      const Cube& q = family.cubes[i];
      const Cube& r = family.cubes[j];
      if (q.side > r.side || !cube_contains(r, q)) continue;
      family.nested_pairs.emplace_back(i, j);
      family.pair_k.push_back(k_for(i, dyadic_steps(q.side, r.side)));
    }
  }
  return family;
}

CubeFamily enumerate_cubes(const AtomicMeasure& measure, const std::vector<double>& side_grid,
                           std::size_t center_stride, const DoublingParams& params) {
  if (side_grid.empty()) throw Error(ErrorCode::invalid_spec, "side grid is empty");
  if (center_stride < 1) throw Error(ErrorCode::invalid_spec, "center stride must be >= 1");
  std::vector<Cube> cubes;
  for (std::size_t i = 0; i < measure.size(); i += center_stride) {
    const auto p = measure.point(i);
    for (double side : side_grid) cubes.push_back(Cube{Point(p.begin(), p.end()), side});
  }
  return make_family(measure, std::move(cubes), params, FamilyParams{side_grid, center_stride});
}

std::vector<double> dyadic_side_grid(double top, int levels) {
  if (!(top > 0.0) || levels < 1) throw Error(ErrorCode::invalid_spec, "dyadic grid needs top > 0, levels >= 1");
  std::vector<double> grid;
  for (int j = 0; j < levels; ++j) grid.push_back(std::ldexp(top, -j));
  return grid;
}

CubeFamily standard_family(const AtomicMeasure& measure, int levels, std::size_t center_stride) {
  if (center_stride == 0) center_stride = std::max<std::size_t>(1, measure.size() / 16);
  double top = 2.0 * measure.diameter(Metric::max_coordinate);
  if (!(top > 0.0)) top = 1.0;
  return enumerate_cubes(measure, dyadic_side_grid(top, levels), center_stride,
                         DoublingParams::defaults(measure.ambient_dim()));
}

}  // namespace rbmo_lab
