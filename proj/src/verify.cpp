#include "rbmo_lab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "parallel.hpp"
#include "rbmo_lab/error.hpp"

namespace rbmo_lab {

namespace {

/// r with c + r == v in floating point when such an r lies within a few ulps of v - c.
double exact_residual(double v, double c) {
  double r = v - c;
  if (c + r == v) return r;
  const double toward = (c + r < v) ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  double probe = r;
  for (int step = 0; step < 8; ++step) {
    probe = std::nextafter(probe, toward);
    if (c + probe == v) return probe;
  }
  return r;
}

}  // namespace

SampledFunction DecompositionParts::reconstruct() const {
  SampledFunction out{std::vector<double>(f2.size())};
  for (std::size_t i = 0; i < f2.size(); ++i) out[i] = f1_constant + f2[i] + f3[i];
  return out;
}

DecompositionParts decompose(const AtomicMeasure& measure, const SampledFunction& f, const Cube& q, double f2q) {
  validate_function(measure, f);
  DecompositionParts parts{f2q, SampledFunction{std::vector<double>(f.size(), 0.0)},
                           SampledFunction{std::vector<double>(f.size(), 0.0)}, q};
  const Cube twice = dilate(q, 2.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (cube_contains_point(twice, measure.point(i))) {
      parts.f2[i] = exact_residual(f[i], f2q);
    } else {
      parts.f3[i] = exact_residual(f[i], f2q);
    }
  }
  return parts;
}

BConstants b_constants(const Kernel& kernel, const AtomicMeasure& measure, const Cube& q,
                       const DecompositionParts& parts, double eps) {
  const auto atoms = measure.atoms_in(q);
  double mass = 0.0;
  double sum = 0.0;
  for (std::size_t i : atoms) {
    mass += measure.mass(i);
    sum += truncated_at(kernel, measure, parts.f3.values, eps, i) * measure.mass(i);
  }
  if (mass <= 0.0) throw Error(ErrorCode::zero_mass, "b constants over an empty cube");
  return BConstants{0.0, sum / mass};
}

FunctionContext prepare_function(const AtomicMeasure& measure, const SampledFunction& f, const CubeFamily& family) {
  validate_function(measure, f);
  FunctionContext ctx;
  ctx.f = f;
  ctx.e_norm = feasibility_norm(measure, f, family, NormKind::E);

  std::vector<Cube> cubes = family.cubes;
  for (const auto& q : family.cubes) {
    Cube d = dilate(q, 2.0);
    if (std::find(cubes.begin(), cubes.end(), d) == cubes.end()) cubes.push_back(std::move(d));
  }
  ctx.a_family = make_family(measure, cubes, family.params, family.provenance);
  ctx.double_of.resize(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Cube d = dilate(family.cubes[i], 2.0);
    const auto it = std::find(ctx.a_family.cubes.begin(), ctx.a_family.cubes.end(), d);
    ctx.double_of[i] = static_cast<std::size_t>(it - ctx.a_family.cubes.begin());
  }
  ctx.a_norm = feasibility_norm(measure, f, ctx.a_family, NormKind::A, 2.0);
  return ctx;
}

EpsContext prepare_eps(const Kernel& kernel, const AtomicMeasure& measure, const CubeFamily& family, double eps) {
  EpsContext ctx;
  ctx.eps = eps;
  ctx.t1 = t_one(kernel, measure, eps);
  ctx.k_cap.resize(family.size());
  ctx.atoms.resize(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    ctx.k_cap[i] = k_cap(measure, family.cubes[i]);
    ctx.atoms[i] = measure.atoms_in(family.cubes[i]);
  }
  return ctx;
}

std::vector<CubeTerms> cube_terms(const Kernel& kernel, const AtomicMeasure& measure, const FunctionContext& ctx,
                                  const CubeFamily& family, const EpsContext& eps_ctx, const SampledFunction& tf) {
  const std::size_t n = measure.size();
  const double reach = 0.5 * eps_ctx.eps + kCubeTolerance;
  std::vector<CubeTerms> out(family.size());
  detail::parallel_for(family.size(), [&](std::size_t c) {
    const Cube twice = dilate(family.cubes[c], 2.0);
    const double f2q = ctx.f2q(c);
    std::vector<std::size_t> inside;
    std::vector<std::size_t> outside;
    for (std::size_t u = 0; u < n; ++u) {
      (cube_contains_point(twice, measure.point(u)) ? inside : outside).push_back(u);
    }
    const bool sum_inside = inside.size() <= outside.size();
    const auto& sources = sum_inside ? inside : outside;

    const auto& atoms = eps_ctx.atoms[c];
    std::vector<double> tf2(atoms.size());
    std::vector<double> tf3(atoms.size());
    double mass = 0.0;
    double t1_sum = 0.0;
    double b3_sum = 0.0;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const std::size_t y = atoms[a];
      const auto py = measure.point(y);
      double s = 0.0;
      for (std::size_t u : sources) {
        if (u == y) continue;
        const auto pu = measure.point(u);
        if (chebyshev_distance(py, pu) <= reach) continue;
        s += kernel(py, pu) * (ctx.f[u] - f2q) * measure.mass(u);
      }
      const double rest = tf[y] - f2q * eps_ctx.t1[y] - s;
      tf2[a] = sum_inside ? s : rest;
      tf3[a] = sum_inside ? rest : s;
      const double m = measure.mass(y);
      mass += m;
      t1_sum += eps_ctx.t1[y] * m;
      b3_sum += tf3[a] * m;
    }
    CubeTerms& t = out[c];
    t.k_cap = eps_ctx.k_cap[c];
    t.f2q = f2q;
    t.t1_average = t1_sum / mass;
    t.b3 = b3_sum / mass;
    t.g_q = f2q * t.t1_average + t.b3;
    double osc = 0.0;
    double i2 = 0.0;
    double i3 = 0.0;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const double m = measure.mass(atoms[a]);
      osc += std::abs(eps_ctx.t1[atoms[a]] - t.t1_average) * m;
      i2 += std::abs(tf2[a]) * m;
      i3 += std::abs(tf3[a] - t.b3) * m;
    }
    t.t1_oscillation = osc / mass;
    if (family.doubling[c]) {
      t.i2 = i2 / mass;
      t.i3 = i3 / mass;
    }
  });
  return out;
}

Lemma23Report lemma23_from_terms(const FunctionContext& ctx, const CubeFamily& family,
                                 const std::vector<CubeTerms>& terms) {
  Lemma23Report r;
  r.i2.assign(family.size(), std::nullopt);
  r.i3.assign(family.size(), std::nullopt);
  const double norm = ctx.e_norm.value;
  if (norm <= 0.0) {
    r.zero_norm = true;
    return r;
  }
  for (std::size_t c = 0; c < family.size(); ++c) {
    if (!terms[c].i2) continue;
    r.i2[c] = *terms[c].i2 / norm;
    r.i3[c] = *terms[c].i3 / norm;
    r.headline_i2 = std::max(r.headline_i2, *r.i2[c]);
    r.headline_i3 = std::max(r.headline_i3, *r.i3[c]);
  }
  r.headline = std::max(r.headline_i2, r.headline_i3);
  return r;
}

Lemma23KReport lemma23k_from_terms(const FunctionContext& ctx, const CubeFamily& family,
                                   const std::vector<CubeTerms>& terms) {
  Lemma23KReport r;
  const double norm = ctx.e_norm.value;
  if (norm <= 0.0) {
    r.zero_norm = true;
    return r;
  }
  r.ratio2.assign(family.nested_pairs.size(), 0.0);
  r.ratio3.resize(family.nested_pairs.size());
  for (std::size_t p = 0; p < family.nested_pairs.size(); ++p) {
    const auto [i, j] = family.nested_pairs[p];
    r.ratio3[p] = std::abs(terms[i].b3 - terms[j].b3) / (norm * family.pair_k[p]);
    r.headline = std::max(r.headline, r.ratio3[p]);
  }
  return r;
}

Lemma23Report lemma23_report(const Kernel& kernel, const AtomicMeasure& measure, const FunctionContext& ctx,
                             const CubeFamily& family, double eps) {
  if (family.doubling_indices().empty()) throw Error(ErrorCode::no_doubling_cubes, "family has no doubling cube");
  const auto eps_ctx = prepare_eps(kernel, measure, family, eps);
  const auto tf = apply_truncated(kernel, measure, ctx.f, eps);
  return lemma23_from_terms(ctx, family, cube_terms(kernel, measure, ctx, family, eps_ctx, tf));
}

Lemma23KReport lemma23k_report(const Kernel& kernel, const AtomicMeasure& measure, const FunctionContext& ctx,
                               const CubeFamily& family, double eps) {
  const auto eps_ctx = prepare_eps(kernel, measure, family, eps);
  const auto tf = apply_truncated(kernel, measure, ctx.f, eps);
  return lemma23k_from_terms(ctx, family, cube_terms(kernel, measure, ctx, family, eps_ctx, tf));
}

T1Row t1_row(const AtomicMeasure& measure, const CubeFamily& family, const EpsContext& eps_ctx) {
  T1Row row;
  row.eps = eps_ctx.eps;
  for (double v : eps_ctx.t1.values) row.sup_t1 = std::max(row.sup_t1, std::abs(v));
  std::vector<double> avg(family.size(), 0.0);
  for (std::size_t c : family.doubling_indices()) {
    double sum = 0.0;
    for (std::size_t i : eps_ctx.atoms[c]) sum += eps_ctx.t1[i] * measure.mass(i);
    avg[c] = sum / family.masses[c];
    double osc = 0.0;
    for (std::size_t i : eps_ctx.atoms[c]) osc += std::abs(eps_ctx.t1[i] - avg[c]) * measure.mass(i);
    row.h1 = std::max(row.h1, eps_ctx.k_cap[c] * osc / family.masses[c]);
  }
  for (std::size_t p : family.doubling_pair_indices()) {
    const auto [i, j] = family.nested_pairs[p];
    row.h2 = std::max(row.h2, eps_ctx.k_cap[i] * std::abs(avg[i] - avg[j]) / family.pair_k[p]);
  }
  return row;
}

std::vector<T1Row> t1_report(const Kernel& kernel, const AtomicMeasure& measure, const CubeFamily& family,
                             const std::vector<double>& eps_grid) {
  if (family.doubling_indices().empty()) throw Error(ErrorCode::no_doubling_cubes, "family has no doubling cube");
  std::vector<T1Row> rows;
  for (double eps : eps_grid) rows.push_back(t1_row(measure, family, prepare_eps(kernel, measure, family, eps)));
  return rows;
}

TheoremReport boundedness_report(const Kernel& kernel, const AtomicMeasure& measure,
                                 const std::vector<SampledFunction>& corpus, const CubeFamily& family,
                                 const std::vector<double>& eps_grid, bool keep_cube_rows) {
  if (family.doubling_indices().empty()) throw Error(ErrorCode::no_doubling_cubes, "family has no doubling cube");
  TheoremReport report;
  report.kernel = kernel.name();
  report.measure_hash = measure.content_hash();
  report.atoms = measure.size();
  report.family = family.provenance;
  report.beta = family.params.beta;
  report.eps_grid = eps_grid;
  report.corpus_size = corpus.size();

  std::vector<FunctionContext> contexts;
  contexts.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    contexts.push_back(prepare_function(measure, corpus[k], family));
    if (contexts.back().e_norm.value <= 0.0) {
      throw Error(ErrorCode::zero_norm, "corpus function " + std::to_string(k) + " has zero norm");
    }
  }
  std::vector<double> growth(corpus.size(), 0.0);
  if (!contexts.empty()) {
    const CubeFamily& af = contexts.front().a_family;
    std::vector<double> caps(af.size());
    for (std::size_t c = 0; c < af.size(); ++c) caps[c] = k_cap(measure, af.cubes[c]);
    for (std::size_t k = 0; k < contexts.size(); ++k) {
      for (std::size_t c = 0; c < af.size(); ++c) {
        if (contexts[k].a_norm.witness[c]) {
          growth[k] = std::max(growth[k], std::abs(*contexts[k].a_norm.witness[c]) / caps[c]);
        }
      }
    }
  }

  const auto doubling = family.doubling_indices();
  const auto doubling_pairs = family.doubling_pair_indices();
  for (double eps : eps_grid) {
    const EpsContext eps_ctx = prepare_eps(kernel, measure, family, eps);
    const T1Row t1 = t1_row(measure, family, eps_ctx);
    report.t1.push_back(t1);
    report.h1 = std::max(report.h1, t1.h1);
    report.h2 = std::max(report.h2, t1.h2);
    report.sup_t1 = std::max(report.sup_t1, t1.sup_t1);
    for (std::size_t k = 0; k < contexts.size(); ++k) {
      const FunctionContext& ctx = contexts[k];
      const SampledFunction tf = apply_truncated(kernel, measure, ctx.f, eps);
      const auto terms = cube_terms(kernel, measure, ctx, family, eps_ctx, tf);
      FunctionRow row;
      row.function = k;
      row.eps = eps;
      row.norm_f = ctx.e_norm.value;
      row.norm_tf = feasibility_norm(measure, tf, family, NormKind::E).value;
      row.ratio = row.norm_tf / row.norm_f;
      for (std::size_t c : doubling) {
        double osc = 0.0;
        for (std::size_t i : eps_ctx.atoms[c]) osc += std::abs(tf[i] - terms[c].g_q) * measure.mass(i);
        row.witnessed_oscillation = std::max(row.witnessed_oscillation, osc / family.masses[c]);
      }
      for (std::size_t p : doubling_pairs) {
        const auto [i, j] = family.nested_pairs[p];
        row.witnessed_pair = std::max(row.witnessed_pair, std::abs(terms[i].g_q - terms[j].g_q) / family.pair_k[p]);
      }
      row.lemma23 = lemma23_from_terms(ctx, family, terms).headline;
      row.lemma23k = lemma23k_from_terms(ctx, family, terms).headline;
      row.f_q_growth = growth[k];
      report.headline = std::max(report.headline, row.ratio);
      report.per_function.push_back(row);
      if (keep_cube_rows) {
        for (std::size_t c = 0; c < family.size(); ++c) {
          report.per_cube.push_back(CubeRow{k, eps, c, static_cast<bool>(family.doubling[c]), terms[c]});
        }
      }
    }
  }
  return report;
}

SampledFunction log_singularity(const AtomicMeasure& measure, const Point& p) {
  if (p.size() != measure.ambient_dim()) throw Error(ErrorCode::dimension_mismatch, "singularity point dimension");
  SampledFunction f{std::vector<double>(measure.size())};
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const double d = euclidean_distance(measure.point(i), p);
    if (d <= 0.0) throw Error(ErrorCode::invalid_spec, "singularity sits on an atom");
    f[i] = -std::log(d);
  }
  return f;
}

std::vector<SampledFunction> standard_corpus(const AtomicMeasure& measure, std::size_t count, std::uint64_t seed) {
  const std::size_t n = measure.size();
  const std::size_t dim = measure.ambient_dim();
  std::vector<double> lo(dim, 0.0);
  std::vector<double> hi(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    lo[k] = hi[k] = n ? measure.point(0)[k] : 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      lo[k] = std::min(lo[k], measure.point(i)[k]);
      hi[k] = std::max(hi[k], measure.point(i)[k]);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto inside = [&] {
    Point p(dim);
    for (std::size_t k = 0; k < dim; ++k) p[k] = lo[k] + (hi[k] - lo[k]) * unit(rng);
    return p;
  };

  std::vector<SampledFunction> corpus;
  while (corpus.size() < count) {
    SampledFunction f{std::vector<double>(n, 0.0)};
    switch (corpus.size() % 4) {
      case 0: {  // affine
        std::vector<double> a(dim);
        for (double& v : a) v = 2.0 * unit(rng) - 1.0;
        a[0] = a[0] >= 0.0 ? a[0] + 0.5 : a[0] - 0.5;
        const double b = 2.0 * unit(rng) - 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          double s = b;
          for (std::size_t k = 0; k < dim; ++k) s += a[k] * measure.point(i)[k];
          f[i] = s;
        }
        break;
      }
      case 1: {  // logarithmic
        Point p = inside();
        p[0] += 1e-3 * (hi[0] - lo[0] + 1.0) * (0.5 + unit(rng));
        f = log_singularity(measure, p);
        break;
      }
      case 2: {  // indicator of a box around a random point
        const Point p = inside();
        const double r = (0.1 + 0.3 * unit(rng)) * std::max(measure.diameter(Metric::max_coordinate), 1e-300);
        for (std::size_t i = 0; i < n; ++i) f[i] = chebyshev_distance(measure.point(i), p) <= r ? 1.0 : 0.0;
        break;
      }
      default: {  // random smooth
        constexpr int kModes = 4;
        const double span = std::max(measure.diameter(Metric::max_coordinate), 1e-300);
        for (int m = 0; m < kModes; ++m) {
          std::vector<double> w(dim);
          for (double& v : w) v = (2.0 * unit(rng) - 1.0) * 2.0 * std::numbers::pi * (m + 1) / span;
          const double phase = 2.0 * std::numbers::pi * unit(rng);
          const double amp = (2.0 * unit(rng) - 1.0) / (m + 1);
          for (std::size_t i = 0; i < n; ++i) {
            double s = phase;
            for (std::size_t k = 0; k < dim; ++k) s += w[k] * measure.point(i)[k];
            f[i] += amp * std::sin(s);
          }
        }
        break;
      }
    }
    const auto [mn, mx] = std::minmax_element(f.values.begin(), f.values.end());
    if (n > 1 && *mn == *mx) continue;
    corpus.push_back(std::move(f));
  }
  return corpus;
}

}  // namespace rbmo_lab
