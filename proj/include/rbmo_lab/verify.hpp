#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbmo_lab/czo.hpp"
#include "rbmo_lab/geometry.hpp"
#include "rbmo_lab/measure.hpp"
#include "rbmo_lab/rbmo.hpp"

namespace rbmo_lab {

/// f = f1 + f2 + f3 around a cube Q: f1 is the constant f_{2Q}, f2 is
/// (f - f_{2Q}) on 2Q and f3 is (f - f_{2Q}) off 2Q.
struct DecompositionParts {
  double f1_constant = 0.0;
  SampledFunction f2;
  SampledFunction f3;
  Cube cube;

  SampledFunction reconstruct() const;
};

DecompositionParts decompose(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double f2q);

struct BConstants {
  double b2 = 0.0;
  double b3 = 0.0;
};

/// b2 = 0 and b3 = average over Q of T_eps f3, summed directly.
BConstants b_constants(const Kernel& kernel, const AtomicMeasure& measure, const Cube& q,
                       const DecompositionParts& parts, double eps);

/// Everything about one function that does not depend on eps: its E-norm on
/// the family and the A(rho = 2) witnesses f_{2Q}, solved once on the family
/// enlarged by the doubles of its cubes.
struct FunctionContext {
  SampledFunction f;
  NormEstimate e_norm;
  CubeFamily a_family;
  NormEstimate a_norm;
  /// family cube i -> index of 2 Q_i in a_family
  std::vector<std::size_t> double_of;

  double f2q(std::size_t i) const { return *a_norm.witness[double_of[i]]; }
};

FunctionContext prepare_function(const AtomicMeasure& measure, const SampledFunction& f, const CubeFamily& family);

/// Per family cube, at one eps.
struct CubeTerms {
  double k_cap = 0.0;
  double t1_average = 0.0;
  /// average over Q of |T1 - <T1>_Q|
  double t1_oscillation = 0.0;
  double f2q = 0.0;
  double b3 = 0.0;
  double g_q = 0.0;
  /// averages over Q of |T f2 - b2| and |T f3 - b3| (doubling cubes only, not normalized)
  std::optional<double> i2;
  std::optional<double> i3;
};

/// Eps-level data shared by every function: T1 and the K(Q) values.
struct EpsContext {
  double eps = 0.0;
  SampledFunction t1;
  std::vector<double> k_cap;
  std::vector<std::vector<std::size_t>> atoms;
};

EpsContext prepare_eps(const Kernel& kernel, const AtomicMeasure& measure, const CubeFamily& family, double eps);

/// Per-cube terms, using T f = f_{2Q} T1 + T f2 + T f3 to sum over whichever
/// side of 2Q holds fewer atoms. `tf` is T_eps f on all atoms.
std::vector<CubeTerms> cube_terms(const Kernel& kernel, const AtomicMeasure& measure, const FunctionContext& ctx,
                                  const CubeFamily& family, const EpsContext& eps_ctx, const SampledFunction& tf);

struct Lemma23Report {
  bool zero_norm = false;
  /// per family cube, I_k / ||f||; empty for non-doubling cubes
  std::vector<std::optional<double>> i2;
  std::vector<std::optional<double>> i3;
  double headline_i2 = 0.0;
  double headline_i3 = 0.0;
  double headline = 0.0;
};

Lemma23Report lemma23_report(const Kernel& kernel, const AtomicMeasure& measure, const FunctionContext& ctx,
                             const CubeFamily& family, double eps);
Lemma23Report lemma23_from_terms(const FunctionContext& ctx, const CubeFamily& family,
                                 const std::vector<CubeTerms>& terms);

struct Lemma23KReport {
  bool zero_norm = false;
  /// per nested pair, |b_{3,Q} - b_{3,R}| / (||f|| K(Q,R))
  std::vector<double> ratio3;
  /// per nested pair, the same for b_2 (identically zero)
  std::vector<double> ratio2;
  double headline = 0.0;
};

Lemma23KReport lemma23k_report(const Kernel& kernel, const AtomicMeasure& measure, const FunctionContext& ctx,
                               const CubeFamily& family, double eps);
Lemma23KReport lemma23k_from_terms(const FunctionContext& ctx, const CubeFamily& family,
                                   const std::vector<CubeTerms>& terms);

struct T1Row {
  double eps = 0.0;
  /// max over doubling Q of K(Q) * osc(T1, Q, <T1>_Q, 1)
  double h1 = 0.0;
  /// max over doubling pairs of K(Q) |<T1>_Q - <T1>_R| / K(Q,R)
  double h2 = 0.0;
  double sup_t1 = 0.0;
};

std::vector<T1Row> t1_report(const Kernel& kernel, const AtomicMeasure& measure, const CubeFamily& family,
                             const std::vector<double>& eps_grid);
T1Row t1_row(const AtomicMeasure& measure, const CubeFamily& family, const EpsContext& eps_ctx);

struct FunctionRow {
  std::size_t function = 0;
  double eps = 0.0;
  double norm_f = 0.0;
  /// E-norm of T_eps f on the family, without witnesses.
  double norm_tf = 0.0;
  double ratio = 0.0;
  /// max over doubling Q of (1/mu(Q)) sum_Q |g - g_Q|, with g_Q = f_{2Q}<T1>_Q + b_{2,Q} + b_{3,Q}
  double witnessed_oscillation = 0.0;
  /// max over doubling pairs of |g_Q - g_R| / K(Q,R)
  double witnessed_pair = 0.0;
  double lemma23 = 0.0;
  double lemma23k = 0.0;
  /// max over the A-family of |f_Q| / K(Q)
  double f_q_growth = 0.0;
};

struct CubeRow {
  std::size_t function = 0;
  double eps = 0.0;
  std::size_t cube = 0;
  bool doubling = false;
  CubeTerms terms;
};

struct TheoremReport {
  std::vector<T1Row> t1;
  std::vector<FunctionRow> per_function;
  std::vector<CubeRow> per_cube;
  double h1 = 0.0;
  double h2 = 0.0;
  double sup_t1 = 0.0;
  double headline = 0.0;
  // provenance
  std::string kernel;
  std::uint64_t measure_hash = 0;
  std::size_t atoms = 0;
  FamilyParams family;
  double beta = 0.0;
  std::vector<double> eps_grid;
  std::size_t corpus_size = 0;
};

/// Runs the whole pipeline for every (function, eps) pair. ZeroNorm if a
/// corpus function has zero E-norm on the family.
TheoremReport boundedness_report(const Kernel& kernel, const AtomicMeasure& measure,
                                 const std::vector<SampledFunction>& corpus, const CubeFamily& family,
                                 const std::vector<double>& eps_grid, bool keep_cube_rows = false);

/// Affine, logarithmic, indicator and random-smooth functions in turn.
std::vector<SampledFunction> standard_corpus(const AtomicMeasure& measure, std::size_t count, std::uint64_t seed);

/// log(1 / |x - p|) in the euclidean norm.
SampledFunction log_singularity(const AtomicMeasure& measure, const Point& p);

}  // namespace rbmo_lab
