#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rbmo_lab/czo.hpp"
#include "rbmo_lab/error.hpp"

using namespace rbmo_lab;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_spec;
}

const AtomicMeasure& line(std::size_t n) {
  static std::map<std::size_t, AtomicMeasure> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_measure(UniformGrid{0.0, 1.0, n, 2}, Metric::euclidean)).first;
  return it->second;
}

SampledFunction random_function(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SampledFunction f{std::vector<double>(n)};
  for (auto& v : f.values) v = u(rng);
  return f;
}

/// T_eps f by the textbook double loop.
double truncated_oracle(const AtomicMeasure& m, const SampledFunction& f, double eps, std::size_t x) {
  double s = 0.0;
  for (std::size_t y = 0; y < m.size(); ++y) {
    const double dx = std::abs(m.point(x)[0] - m.point(y)[0]);
    const double dy = std::abs(m.point(x)[1] - m.point(y)[1]);
    if (std::max(dx, dy) <= eps / 2 + 1e-12) continue;
    s += oracle::kernel_re(m.point(x)[0], m.point(x)[1], m.point(y)[0], m.point(y)[1]) * f[y] * m.mass(y);
  }
  return s;
}

double svd_oracle(const Kernel& k, const AtomicMeasure& m, double eps) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || chebyshev_distance(m.point(i), m.point(j)) <= eps / 2 + 1e-12) continue;
      b(i, j) = std::sqrt(m.mass(i) * m.mass(j)) * k(m.point(i), m.point(j));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("built-in kernel values") {
  const auto re = Kernel::cauchy(false);
  const auto im = Kernel::cauchy(true);
  const std::vector<double> o{0.0, 0.0};
  CHECK(re(std::vector<double>{1.0, 0.0}, o) == 1.0);
  CHECK(im(std::vector<double>{0.0, 1.0}, o) == -1.0);
  const auto r1 = Kernel::riesz(1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> x{u(rng), u(rng)};
    const std::vector<double> y{u(rng), u(rng)};
    CHECK(r1(x, y) == -r1(y, x));
    CHECK(re(x, y) == -re(y, x));
    CHECK(re(x, y) == doctest::Approx(oracle::kernel_re(x[0], x[1], y[0], y[1])).epsilon(1e-15));
  }
  CHECK(r1.antisymmetric());
  CHECK(re.delta() == 1.0);
}

TEST_CASE("kernel lookup by name") {
  const auto plane = build_measure(CantorFourCorner{2});
  CHECK(builtin_kernel("cauchy_re", plane).kind() == Kernel::Kind::cauchy_re);
  CHECK(builtin_kernel("cauchy_im", plane).kind() == Kernel::Kind::cauchy_im);
  CHECK(builtin_kernel("riesz(1)", plane).n() == 1.0);
  CHECK(builtin_kernel("riesz:1", plane).kind() == Kernel::Kind::riesz);
  const auto m1 = build_measure(UniformGrid{0.0, 1.0, 16});
  CHECK(code_of([&] { builtin_kernel("cauchy_re", m1); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { builtin_kernel("riesz(2)", plane); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { builtin_kernel("hilbert", plane); }) == ErrorCode::unknown_kernel);
}

TEST_CASE("eps grid") {
  const auto grid = geometric_eps_grid(line(256), 8);
  REQUIRE(grid.size() == 8);
  CHECK(grid.front() == doctest::Approx(line(256).diameter()));
  CHECK(grid.back() == doctest::Approx(1.0 / 256));
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] < grid[k - 1]);
}

TEST_CASE("kernel conditions on the line and the cantor set") {
  const auto re = Kernel::cauchy(false);
  const auto im = Kernel::cauchy(true);
  const auto cantor = build_measure(CantorFourCorner{3}, Metric::euclidean);
  for (const auto* m : {&line(128), &cantor}) {
    for (const auto* k : {&re, &im}) {
      const auto rep = kernel_condition_report(*k, *m, 3000, 11);
      CHECK(rep.size_c_euclidean <= 1.0 + 1e-9);
      CHECK(rep.size_c <= 1.0 + 1e-9);
      CHECK(rep.hoelder_c <= 8.0);
      CHECK(rep.triples > 0);
    }
  }
}

TEST_CASE("sampled Hoelder constant is below the dense triple scan") {
  const auto m = build_measure(CantorFourCorner{2}, Metric::euclidean);
  const auto re = Kernel::cauchy(false);
  double dense = 0.0;
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = 0; b < m.size(); ++b) {
      for (std::size_t y = 0; y < m.size(); ++y) {
        if (a == b || y == a || y == b) continue;
        const double d12 = euclidean_distance(m.point(a), m.point(b));
        const double d1y = euclidean_distance(m.point(a), m.point(y));
        if (2 * d12 > d1y) continue;
        const double inc = std::abs(re(m.point(a), m.point(y)) - re(m.point(b), m.point(y))) +
                           std::abs(re(m.point(y), m.point(a)) - re(m.point(y), m.point(b)));
        dense = std::max(dense, inc * d1y * d1y / d12);
      }
    }
  }
  const auto rep = kernel_condition_report(re, m, 5000, 5);
  CHECK(rep.hoelder_c <= dense + 1e-12);
  CHECK(rep.hoelder_c >= 0.5 * dense);
  CHECK(dense <= 8.0);
}

TEST_CASE("cancellation vanishes around the center of a symmetric grid") {
  const auto& m = line(257);
  const std::size_t center = 128;
  REQUIRE(m.point(center)[0] == doctest::Approx(0.5));
  const std::vector<std::size_t> centers{center};
  for (const auto& k : {Kernel::cauchy(false), Kernel::cauchy(true)}) {
    const auto rep = kernel_condition_report(k, m, 2000, 9, centers);
    CHECK(rep.annuli > 0);
    CHECK(rep.cancellation_sup <= 1e-12);
  }
}

TEST_CASE("report is deterministic and monotone in the sample count") {
  const auto cantor = build_measure(CantorFourCorner{3});
  const auto re = Kernel::cauchy(false);
  const auto a = kernel_condition_report(re, cantor, 500, 42);
  const auto b = kernel_condition_report(re, cantor, 500, 42);
  const auto c = kernel_condition_report(re, cantor, 2000, 42);
  CHECK(a.size_c == b.size_c);
  CHECK(a.hoelder_c == b.hoelder_c);
  CHECK(a.cancellation_sup == b.cancellation_sup);
  CHECK(c.size_c >= a.size_c);
  CHECK(c.hoelder_c >= a.hoelder_c);
  CHECK(c.cancellation_sup >= a.cancellation_sup);
}

TEST_CASE("truncated operator") {
  const auto& m = line(256);
  const auto re = Kernel::cauchy(false);
  const SampledFunction zero{std::vector<double>(m.size(), 0.0)};
  for (double v : apply_truncated(re, m, zero, 0.01).values) CHECK(v == 0.0);
  for (double v : t_one(re, m, 2.0 * m.diameter()).values) CHECK(v == 0.0);
  CHECK_THROWS_AS(apply_truncated(re, m, zero, 0.0), Error);

  const auto f = random_function(m.size(), 1);
  const auto tf = apply_truncated(re, m, f, 0.03);
  for (std::size_t x = 0; x < m.size(); x += 5) {
    CHECK(tf[x] == doctest::Approx(truncated_oracle(m, f, 0.03, x)).epsilon(1e-12));
  }

  // linearity
  const auto g = random_function(m.size(), 2);
  SampledFunction comb{std::vector<double>(m.size())};
  for (std::size_t i = 0; i < m.size(); ++i) comb[i] = 2.0 * f[i] - 3.0 * g[i];
  const auto tg = apply_truncated(re, m, g, 0.03);
  const auto tc = apply_truncated(re, m, comb, 0.03);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(tc[i] == doctest::Approx(2.0 * tf[i] - 3.0 * tg[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("center atom of a symmetric grid sees no T1") {
  const auto& m = line(257);
  const auto t1 = t_one(Kernel::cauchy(false), m, 1.0 / 256);
  CHECK(std::abs(t1[128]) < 1e-9);
}

TEST_CASE("annulus identity") {
  const auto& m = line(128);
  const auto re = Kernel::cauchy(false);
  const auto f = random_function(m.size(), 4);
  const double e1 = 0.2;
  const double e2 = 0.05;
  const auto t1 = apply_truncated(re, m, f, e1);
  const auto t2 = apply_truncated(re, m, f, e2);
  for (std::size_t x = 0; x < m.size(); ++x) {
    double ann = 0.0;
    for (std::size_t y = 0; y < m.size(); ++y) {
      const double d = chebyshev_distance(m.point(x), m.point(y));
      if (d > e2 / 2 + 1e-12 && d <= e1 / 2 + 1e-12) ann += re(m.point(x), m.point(y)) * f[y] * m.mass(y);
    }
    CHECK(std::abs((t2[x] - t1[x]) - ann) <= 1e-12);
  }
}

TEST_CASE("antisymmetric double sum cancels") {
  const auto cantor = build_measure(CantorFourCorner{3});
  for (const auto& k : {Kernel::cauchy(false), Kernel::cauchy(true), Kernel::riesz(1.0)}) {
    const auto t1 = t_one(k, cantor, 0.05);
    double s = 0.0;
    for (std::size_t i = 0; i < cantor.size(); ++i) s += t1[i] * cantor.mass(i);
    CHECK(std::abs(s) <= 1e-12);
  }
}

TEST_CASE("L2 operator norm against a dense SVD") {
  const auto re = Kernel::cauchy(false);
  const auto& m = line(96);
  for (double eps : {0.5, 0.1, 0.02}) {
    CHECK(l2_opnorm(re, m, eps, 5000) == doctest::Approx(svd_oracle(re, m, eps)).epsilon(1e-6));
  }
  const auto cantor = build_measure(CantorFourCorner{3});
  CHECK(l2_opnorm(Kernel::cauchy(true), cantor, 0.03, 5000) ==
        doctest::Approx(svd_oracle(Kernel::cauchy(true), cantor, 0.03)).epsilon(1e-6));

  const auto zero = Kernel::custom("zero", 1.0, 1.0, true, [](auto, auto) { return 0.0; });
  CHECK(l2_opnorm(zero, m, 0.1, 10) == 0.0);
  const AtomicMeasure one(2, 1.0, {0.3, 0.3}, {1.0});
  CHECK(l2_opnorm(re, one, 0.1, 10) == 0.0);
  CHECK_THROWS_AS(l2_opnorm(re, m, 0.1, 0), Error);
}
