#include <doctest.h>

#include <cmath>
#include <set>

#include "funcevt/numerics.hpp"

using namespace funcevt;

TEST_CASE("split_seed is deterministic and spreads indices") {
  CHECK(split_seed(42, 7) == split_seed(42, 7));
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(split_seed(42, r));
  CHECK(seen.size() == 1000);
  CHECK(split_seed(1, 0) != split_seed(2, 0));
}

TEST_CASE("Gauss-Hermite rule integrates normal moments") {
  const QuadratureRule rule = gauss_hermite_rule(64);
  double m0 = 0, m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    m0 += rule.weights[i];
    m2 += rule.weights[i] * z * z;
    m4 += rule.weights[i] * z * z * z * z;
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre rule is exact for low-degree polynomials") {
  const QuadratureRule rule = gauss_legendre_rule(8);
  double acc = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], 14);
  CHECK(acc == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("adaptive integration") {
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, INFINITY) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("normal distribution helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_sf(10.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-10));
  for (double p : {1e-10, 0.01, 0.3, 0.5, 0.9}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("descriptive statistics") {
  const std::vector<double> xs = {1, 2, 3, 4};
  const std::vector<double> ys = {2, 4, 6, 8};
  CHECK(mean(xs) == 2.5);
  CHECK(variance(xs) == doctest::Approx(5.0 / 3.0));
  CHECK(covariance(xs, ys) == doctest::Approx(10.0 / 3.0));
  CHECK(median(xs) == 2.5);
  CHECK(quantile(xs, 0.25) == doctest::Approx(1.75));
  CHECK(quantile(xs, 1.0) == 4.0);
}

TEST_CASE("KS statistic and p-value") {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
  const double d = ks_statistic(grid, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d == doctest::Approx(0.005));
  CHECK(ks_pvalue(d, 100) > 0.99);
  CHECK(ks_pvalue(0.3, 100) < 1e-6);
}
