#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rbmo_lab/measure.hpp"

namespace rbmo_lab {

/// Threshold pair for the doubling test mu(alpha Q) < beta mu(Q).
struct DoublingParams {
  double alpha = 4.0;
  double beta = 32.0;

  /// beta = 2 * 4^(m+1).
  static DoublingParams defaults(std::size_t ambient_dim);
  /// Throws InvalidSpec unless beta > alpha^n.
  void validate(double dim_param) const;
};

Cube dilate(const Cube& cube, double lambda);

/// Per-coordinate interval inclusion with kCubeTolerance slack.
bool cube_contains(const Cube& outer, const Cube& inner) noexcept;

/// Smallest k >= 0 with 2^k * inner_side >= outer_side.
int dyadic_steps(double inner_side, double outer_side);

/// K(Q,R) = 1 + sum_{j=1}^{N} mu(2^j Q) / side(2^j Q)^n, with N = dyadic_steps.
/// Dilates are taken about Q's own center. Throws NotNested unless Q is inside R.
double k_coefficient(const AtomicMeasure& measure, const Cube& q, const Cube& r);

/// Same sum without the containment check; 1 when steps == 0.
double k_sum(const AtomicMeasure& measure, const Cube& q, int steps);

/// Smallest k >= 1 with mu(2^k Q) > mu(R^m)/2.
int k_cap_steps(const AtomicMeasure& measure, const Cube& q);

/// K(Q) = K(Q, 2^k Q) for k = k_cap_steps(Q).
double k_cap(const AtomicMeasure& measure, const Cube& q);

/// mu(alpha Q) < beta mu(Q); cubes of zero mass are never doubling.
bool is_doubling(const AtomicMeasure& measure, const Cube& q, const DoublingParams& params);

/// First doubling cube in Q, aQ, a^2 Q, ... (a = params.alpha). NotFound after
/// max_steps dilates, with the ratio trace in the message.
Cube smallest_doubling_dilate(const AtomicMeasure& measure, const Cube& q, const DoublingParams& params,
                              int max_steps);

/// How a family was produced; stamped into every norm estimate built on it.
struct FamilyParams {
  std::vector<double> side_grid;
  std::size_t center_stride = 1;
};

/// Finite surrogate for "all cubes" with the doubling flags and the nesting
/// relation precomputed.
struct CubeFamily {
  std::vector<Cube> cubes;
  std::vector<double> masses;
  std::vector<bool> doubling;
  /// (i, j) with cubes[i] inside cubes[j], side_i <= side_j, i != j.
  std::vector<std::pair<std::size_t, std::size_t>> nested_pairs;
  /// K(cubes[i], cubes[j]) for each nested pair.
  std::vector<double> pair_k;
  DoublingParams params;
  FamilyParams provenance;

  std::size_t size() const noexcept { return cubes.size(); }
  std::vector<std::size_t> doubling_indices() const;
  /// Indices into nested_pairs whose two cubes are both doubling.
  std::vector<std::size_t> doubling_pair_indices() const;
};

/// Builds a family from explicit cubes, dropping any of zero mass.
CubeFamily make_family(const AtomicMeasure& measure, std::vector<Cube> cubes, const DoublingParams& params,
                       FamilyParams provenance = {});

/// Cubes centered at atoms 0, stride, 2 stride, ... with every side in side_grid,
/// ordered by center and then by side as listed.
CubeFamily enumerate_cubes(const AtomicMeasure& measure, const std::vector<double>& side_grid,
                           std::size_t center_stride, const DoublingParams& params);

/// {top, top/2, ..., top/2^(levels-1)}.
std::vector<double> dyadic_side_grid(double top, int levels);

/// Cubes of sides 2 diam, diam, ..., (levels of them) centered at every
/// center_stride-th atom, default doubling parameters. Stride 0 picks
/// max(1, N/16).
CubeFamily standard_family(const AtomicMeasure& measure, int levels, std::size_t center_stride);

}  // namespace rbmo_lab
