#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rbmo_lab/error.hpp"
#include "rbmo_lab/verify.hpp"

using namespace rbmo_lab;

namespace {

AtomicMeasure line(std::size_t n) { return build_measure(UniformGrid{0.0, 1.0, n, 2}, Metric::euclidean); }

const AtomicMeasure& m1() {
  static const AtomicMeasure m = line(256);
  return m;
}

SampledFunction log_f(const AtomicMeasure& m) { return log_singularity(m, Point{0.3001, 0.0}); }

SampledFunction random_function(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SampledFunction f{std::vector<double>(n)};
  for (auto& v : f.values) v = u(rng);
  return f;
}

CubeFamily family_of(const AtomicMeasure& m, int levels = 6, std::size_t stride = 0) {
  return standard_family(m, levels, stride);
}

Kernel zero_kernel() {
  return Kernel::custom("zero", 1.0, 1.0, true, [](auto, auto) { return 0.0; });
}

bool in_cube(const AtomicMeasure& m, std::size_t i, const Cube& q) {
  for (std::size_t k = 0; k < m.ambient_dim(); ++k) {
    if (std::abs(m.point(i)[k] - q.center[k]) > q.side / 2 + 1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("decomposition") {
  const Cube q{{0.5, 0.0}, 0.25};
  const SampledFunction c{std::vector<double>(m1().size(), 1.75)};
  const auto flat = decompose(m1(), c, q, 1.75);
  for (std::size_t i = 0; i < m1().size(); ++i) {
    CHECK(flat.f2[i] == 0.0);
    CHECK(flat.f3[i] == 0.0);
  }
  const auto cover = decompose(m1(), log_f(m1()), Cube{{0.5, 0.0}, 1.0}, 0.3);
  for (double v : cover.f3.values) CHECK(v == 0.0);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = random_function(m1().size(), seed);
    const double f2q = 0.1 * static_cast<double>(seed) / 3.0;
    const auto parts = decompose(m1(), f, q, f2q);
    const auto back = parts.reconstruct();
    const Cube twice = dilate(q, 2.0);
    for (std::size_t i = 0; i < m1().size(); ++i) {
      // exact whenever some double r has f2q + r == f (scan +-64 ulps around f - f2q)
      bool representable = false;
      double r = f[i] - f2q;
      for (int k = 0; k < 64 && !representable; ++k) r = std::nextafter(r, -1e300);
      for (int k = 0; k < 129 && !representable; ++k, r = std::nextafter(r, 1e300)) representable = f2q + r == f[i];
      if (representable) {
        CHECK(back[i] == f[i]);
      } else {
        // one rounding of the largest operand
        const double big = std::max({std::abs(f[i]), std::abs(f2q), std::abs(parts.f2[i] + parts.f3[i])});
        CHECK(std::abs(back[i] - f[i]) <= std::abs(std::nextafter(big, 1e300) - big));
      }
      if (in_cube(m1(), i, twice)) {
        CHECK(parts.f3[i] == 0.0);
      } else {
        CHECK(parts.f2[i] == 0.0);
      }
    }
  }
}

TEST_CASE("b constants") {
  const auto re = Kernel::cauchy(false);
  const Cube q{{0.5, 0.0}, 0.125};
  const auto f = log_f(m1());
  const auto parts = decompose(m1(), f, q, 0.2);
  const double eps = 0.01;
  const auto b = b_constants(re, m1(), q, parts, eps);
  CHECK(b.b2 == 0.0);
  // two-stage oracle: T f3 at every atom of Q, then the average
  double mass = 0.0;
  double sum = 0.0;
  const Cube twice = dilate(q, 2.0);
  for (std::size_t x = 0; x < m1().size(); ++x) {
    if (!in_cube(m1(), x, q)) continue;
    double t = 0.0;
    for (std::size_t y = 0; y < m1().size(); ++y) {
      if (in_cube(m1(), y, twice)) continue;
      if (std::abs(m1().point(x)[0] - m1().point(y)[0]) <= eps / 2 + 1e-12) continue;
      t += oracle::kernel_re(m1().point(x)[0], 0, m1().point(y)[0], 0) * (f[y] - 0.2) * m1().mass(y);
    }
    mass += m1().mass(x);
    sum += t * m1().mass(x);
  }
  CHECK(b.b3 == doctest::Approx(sum / mass).epsilon(1e-12));

  const auto cover = decompose(m1(), f, Cube{{0.5, 0.0}, 1.0}, 0.2);
  CHECK(b_constants(re, m1(), Cube{{0.5, 0.0}, 1.0}, cover, eps).b3 == 0.0);
  try {
    b_constants(re, m1(), Cube{{5.0, 5.0}, 0.1}, cover, eps);
    FAIL("expected ZeroMass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_mass);
  }
}

TEST_CASE("cube terms agree with direct evaluation") {
  const auto re = Kernel::cauchy(false);
  const auto fam = family_of(m1(), 6, 32);
  const auto f = log_f(m1());
  const auto ctx = prepare_function(m1(), f, fam);
  for (double eps : {0.3, 0.02}) {
    const auto eps_ctx = prepare_eps(re, m1(), fam, eps);
    const auto tf = apply_truncated(re, m1(), f, eps);
    const auto terms = cube_terms(re, m1(), ctx, fam, eps_ctx, tf);
    for (std::size_t c = 0; c < fam.size(); ++c) {
      const auto parts = decompose(m1(), f, fam.cubes[c], ctx.f2q(c));
      const auto b = b_constants(re, m1(), fam.cubes[c], parts, eps);
      CHECK(terms[c].b3 == doctest::Approx(b.b3).epsilon(1e-9).scale(1.0));
      CHECK(terms[c].f2q == *ctx.a_norm.witness[ctx.double_of[c]]);
      CHECK(terms[c].k_cap == k_cap(m1(), fam.cubes[c]));
      CHECK(terms[c].g_q == doctest::Approx(ctx.f2q(c) * terms[c].t1_average + b.b3).epsilon(1e-12));
      if (!fam.doubling[c]) {
        CHECK_FALSE(terms[c].i2.has_value());
        continue;
      }
      const auto t2 = apply_truncated(re, m1(), parts.f2, eps);
      const auto t3 = apply_truncated(re, m1(), parts.f3, eps);
      double mass = 0.0, i2 = 0.0, i3 = 0.0;
      for (std::size_t i = 0; i < m1().size(); ++i) {
        if (!in_cube(m1(), i, fam.cubes[c])) continue;
        mass += m1().mass(i);
        i2 += std::abs(t2[i]) * m1().mass(i);
        i3 += std::abs(t3[i] - b.b3) * m1().mass(i);
      }
      CHECK(*terms[c].i2 == doctest::Approx(i2 / mass).epsilon(1e-9).scale(1.0));
      CHECK(*terms[c].i3 == doctest::Approx(i3 / mass).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("A(2) witnesses cover the doubles") {
  const auto fam = family_of(m1(), 5, 64);
  const auto ctx = prepare_function(m1(), log_f(m1()), fam);
  for (std::size_t c = 0; c < fam.size(); ++c) {
    CHECK(ctx.a_family.cubes[ctx.double_of[c]] == dilate(fam.cubes[c], 2.0));
    CHECK(ctx.a_norm.witness[ctx.double_of[c]].has_value());
  }
}

TEST_CASE("lemma reports") {
  const auto re = Kernel::cauchy(false);
  const auto fam = family_of(m1());
  const SampledFunction c{std::vector<double>(m1().size(), 3.0)};
  const auto flat = prepare_function(m1(), c, fam);
  CHECK(lemma23_report(re, m1(), flat, fam, 0.05).zero_norm);
  CHECK(lemma23k_report(re, m1(), flat, fam, 0.05).zero_norm);

  const auto ctx = prepare_function(m1(), log_f(m1()), fam);
  const auto l23 = lemma23_report(re, m1(), ctx, fam, 0.05);
  CHECK_FALSE(l23.zero_norm);
  CHECK(std::isfinite(l23.headline));
  CHECK(l23.headline > 0.0);
  const auto l23k = lemma23k_report(re, m1(), ctx, fam, 0.05);
  CHECK(std::isfinite(l23k.headline));
  REQUIRE(l23k.ratio2.size() == fam.nested_pairs.size());
  for (double r : l23k.ratio2) CHECK(r == 0.0);

  // a cube whose double covers the support: f2 lives on everything, f3 vanishes
  const Cube big{{m1().point(128)[0], 0.0}, 1.0};
  const auto cover = make_family(m1(), {big}, fam.params);
  const auto cctx = prepare_function(m1(), log_f(m1()), cover);
  const auto eps_ctx = prepare_eps(re, m1(), cover, 0.05);
  const auto terms = cube_terms(re, m1(), cctx, cover, eps_ctx, apply_truncated(re, m1(), cctx.f, 0.05));
  CHECK(terms[0].b3 == 0.0);
  CHECK(terms[0].g_q == cctx.f2q(0) * terms[0].t1_average);

  // Q = R gives a zero ratio
  const auto dup = make_family(m1(), {Cube{{0.5, 0.0}, 0.25}, Cube{{0.5, 0.0}, 0.25}}, fam.params);
  const auto dctx = prepare_function(m1(), log_f(m1()), dup);
  const auto dk = lemma23k_report(re, m1(), dctx, dup, 0.05);
  REQUIRE(dk.ratio3.size() == 2);
  for (double r : dk.ratio3) CHECK(r == 0.0);
}

TEST_CASE("lemma 2.3 headline is stable from 256 to 512 atoms") {
  const auto re = Kernel::cauchy(false);
  double headline[2];
  int k = 0;
  for (std::size_t n : {256u, 512u}) {
    const auto m = line(n);
    const auto fam = family_of(m, 6, n / 16);
    const auto ctx = prepare_function(m, log_f(m), fam);
    headline[k++] = lemma23_report(re, m, ctx, fam, 0.02).headline;
  }
  CHECK(std::max(headline[0], headline[1]) <= 2.0 * std::min(headline[0], headline[1]));
}

TEST_CASE("T1 report") {
  const auto fam = family_of(m1());
  for (const auto& row : t1_report(zero_kernel(), m1(), fam, {0.5, 0.05})) {
    CHECK(row.h1 == 0.0);
    CHECK(row.h2 == 0.0);
    CHECK(row.sup_t1 == 0.0);
  }
  const auto re = Kernel::cauchy(false);
  const Cube q{{0.5, 0.0}, 0.5};
  const auto single = make_family(m1(), {q}, fam.params);
  const auto rows = t1_report(re, m1(), single, {0.1});
  const auto t1 = t_one(re, m1(), 0.1);
  double mass = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < m1().size(); ++i) {
    if (!in_cube(m1(), i, q)) continue;
    mass += m1().mass(i);
    sum += t1[i] * m1().mass(i);
  }
  double osc = 0.0;
  for (std::size_t i = 0; i < m1().size(); ++i) {
    if (in_cube(m1(), i, q)) osc += std::abs(t1[i] - sum / mass) * m1().mass(i);
  }
  CHECK(rows[0].h2 == 0.0);
  CHECK(rows[0].h1 == doctest::Approx(k_cap(m1(), q) * osc / mass).epsilon(1e-12));

  const auto cantor = build_measure(CantorFourCorner{3});
  const auto cfam = family_of(cantor, 6, 4);
  for (const auto& row : t1_report(re, cantor, cfam, geometric_eps_grid(cantor, 8))) {
    CHECK(std::isfinite(row.h1));
    CHECK(std::isfinite(row.h2));
    CHECK(std::isfinite(row.sup_t1));
  }
}

TEST_CASE("boundedness report") {
  const auto re = Kernel::cauchy(false);
  const auto fam = family_of(m1());
  SampledFunction affine{std::vector<double>(m1().size())};
  for (std::size_t i = 0; i < m1().size(); ++i) affine[i] = 2.0 * m1().point(i)[0] - 1.0;
  const auto grid = geometric_eps_grid(m1(), 4);
  const auto rep = boundedness_report(re, m1(), {affine}, fam, grid, true);
  REQUIRE(rep.per_function.size() == grid.size());
  REQUIRE(rep.t1.size() == grid.size());
  for (const auto& row : rep.per_function) {
    CHECK(std::isfinite(row.ratio));
    CHECK(std::isfinite(row.witnessed_oscillation));
    CHECK(std::isfinite(row.witnessed_pair));
    CHECK(std::isfinite(row.f_q_growth));
    CHECK(row.norm_tf == doctest::Approx(row.ratio * row.norm_f).epsilon(1e-14));
  }
  CHECK(rep.per_cube.size() == grid.size() * fam.size());
  CHECK(rep.atoms == m1().size());
  CHECK(rep.measure_hash == m1().content_hash());
  CHECK(rep.kernel == "cauchy_re");

  const auto zero = boundedness_report(zero_kernel(), m1(), {affine}, fam, {0.1}, true);
  CHECK(zero.per_function[0].ratio == 0.0);
  for (const auto& row : zero.per_cube) CHECK(row.terms.g_q == 0.0);

  const auto far = boundedness_report(re, m1(), {affine}, fam, {4.0 * m1().diameter()});
  CHECK(far.per_function[0].ratio == 0.0);

  // ratio invariant under f -> 10 f
  SampledFunction ten = log_f(m1());
  for (auto& v : ten.values) v *= 10.0;
  const auto a = boundedness_report(re, m1(), {log_f(m1())}, fam, {0.05});
  const auto b = boundedness_report(re, m1(), {ten}, fam, {0.05});
  CHECK(b.per_function[0].ratio == doctest::Approx(a.per_function[0].ratio).epsilon(1e-9));

  const SampledFunction flat{std::vector<double>(m1().size(), 1.0)};
  try {
    boundedness_report(re, m1(), {affine, flat}, fam, {0.05});
    FAIL("expected ZeroNorm");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_norm);
  }
}

TEST_CASE("standard corpus") {
  const auto corpus = standard_corpus(m1(), 9, 3);
  REQUIRE(corpus.size() == 9);
  for (const auto& f : corpus) {
    CHECK(f.size() == m1().size());
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    CHECK(*lo < *hi);
    for (double v : f.values) CHECK(std::isfinite(v));
  }
  const auto again = standard_corpus(m1(), 9, 3);
  for (std::size_t k = 0; k < corpus.size(); ++k) CHECK(corpus[k].values == again[k].values);
}
