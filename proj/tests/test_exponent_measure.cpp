#include <doctest.h>

#include <cmath>
#include <random>

#include "funcevt/exponent_measure.hpp"
#include "funcevt/numerics.hpp"

using namespace funcevt;

namespace {

const MeasureOracle mm = MeasureOracle::moving_max(KernelSpec::double_exponential());
const MeasureOracle gbm = MeasureOracle::pareto_gbm();

}  // namespace

TEST_CASE("rectangle masses") {
  CHECK(nu_rect(mm, 0.3, 1.0) == 1.0);
  CHECK(nu_rect(gbm, 0.3, 4.0) == 0.25);
  CHECK(nu_rect(gbm, 0.3, 2.0 * 4.0) == nu_rect(gbm, 0.3, 4.0) / 2.0);
  CHECK_THROWS_AS(nu_rect(mm, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nu_intersection(mm, 0.0, 1.0, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("equal times give the nested-rectangle mass") {
  for (const auto* o : {&mm, &gbm}) {
    CHECK(nu_intersection(*o, 0.4, 1.0, 0.4, 2.0) == 0.5);
    CHECK(nu_intersection(*o, 0.4, 3.0, 0.4, 2.0) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("double-exponential intersections match the analytic form") {
  // integral of max over a shift h is 2 - exp(-h/2), so nu = exp(-h/2).
  for (double h : {0.1, 0.5, 1.0}) {
    CHECK(nu_intersection(mm, 0.0, 1.0, h, 1.0) == doctest::Approx(std::exp(-h / 2)).epsilon(1e-10));
  }
  CHECK(nu_intersection(mm, 0.2, 1.0, 0.7, 1.0) == doctest::Approx(std::exp(-0.25)).epsilon(1e-10));
  const double times[] = {0.0, 0.5};
  const double levels[] = {1.0, 1.0};
  CHECK(nu_union(mm, times, levels) == doctest::Approx(2.0 - std::exp(-0.25)).epsilon(1e-10));
}

TEST_CASE("moving-max quadrature agrees with Monte Carlo") {
  for (const KernelSpec& k : {KernelSpec::double_exponential(), KernelSpec::student_t(3.0, 2.0)}) {
    const MeasureOracle o = MeasureOracle::moving_max(k);
    const double t = 0.1, s = 0.8, x = 1.0, y = 1.2;
    Engine rng(3);
    std::bernoulli_distribution sign;
    std::vector<double> w;
    for (int i = 0; i < 200000; ++i) {
      const double v = sign(rng) ? k.sample_abs(rng) : -k.sample_abs(rng);
      const double u = v - t;
      w.push_back(std::min(1.0 / x, k.density(s + u) / (y * k.density(t + u))));
    }
    const double se = std::sqrt(variance(w) / w.size());
    CHECK(std::abs(nu_intersection(o, t, x, s, y) - mean(w)) < 3 * se);
  }
}

TEST_CASE("Pareto-GBM intersection: closed form, quadrature and Monte Carlo") {
  // E min(1, B(1)) = 1 - put(1, 1) with lognormal B(1).
  const double expect = normal_cdf(-0.5) + normal_cdf(-0.5);
  CHECK(nu_intersection(gbm, 0.0, 1.0, 1.0, 1.0) == doctest::Approx(expect).epsilon(1e-14));
  const MeasureOracle gh = MeasureOracle::pareto_gbm(ExpectationMethod::gauss_hermite, 96);
  const MeasureOracle mc = MeasureOracle::pareto_gbm(ExpectationMethod::monte_carlo, 64, 1'000'000, 7);
  for (auto [t, x, s, y] : {std::array{0.0, 1.0, 1.0, 1.0}, std::array{0.7, 2.0, 0.2, 1.5}}) {
    const double c = nu_intersection(gbm, t, x, s, y);
    CHECK(nu_intersection(gh, t, x, s, y) == doctest::Approx(c).epsilon(2e-3));
    CHECK(nu_intersection(mc, t, x, s, y) == doctest::Approx(c).epsilon(5e-3));
    CHECK(nu_intersection(gbm, s, y, t, x) == c);
    CHECK(c < std::min(1 / x, 1 / y));
  }
  const double times[] = {0.0, 0.5, 1.0};
  const double levels[] = {1.0, 1.0, 1.0};
  const double two = nu_union(gbm, std::span(times, 2), std::span(levels, 2));
  const double three = nu_union(mc, times, levels);
  CHECK(two == doctest::Approx(2.0 - nu_intersection(gbm, 0.0, 1.0, 0.5, 1.0)));
  CHECK(three > two);
  CHECK(three < 2.0);
}

TEST_CASE("intersection mass is bounded by the smaller rectangle") {
  Engine rng(4);
  std::uniform_real_distribution<double> ut(0.0, 1.0), ux(0.5, 5.0);
  for (int i = 0; i < 20; ++i) {
    const double t = ut(rng), s = ut(rng), x = ux(rng), y = ux(rng);
    for (const auto* o : {&mm, &gbm}) {
      const double v = nu_intersection(*o, t, x, s, y);
      CHECK(v <= std::min(1 / x, 1 / y) + 1e-12);
      CHECK(v == doctest::Approx(nu_intersection(*o, s, y, t, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("d metric") {
  CHECK(d_metric(mm, 0.25, {0.3, 2.0}, {0.3, 2.0}) == 0.0);
  CHECK(d_metric(gbm, 0.0, {0.5, 1.0}, {0.5, 2.0}) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  Engine rng(5);
  std::uniform_real_distribution<double> ut(0.0, 1.0), ux(1.0, 6.0);
  for (int i = 0; i < 30; ++i) {
    const Cell a{ut(rng), ux(rng)}, b{ut(rng), ux(rng)}, c{ut(rng), ux(rng)};
    for (const auto* o : {&mm, &gbm}) {
      const double ab = d_metric(*o, 0.25, a, b);
      CHECK(ab == doctest::Approx(d_metric(*o, 0.25, b, a)).epsilon(1e-9));
      CHECK(ab <= d_metric(*o, 0.25, a, c) + d_metric(*o, 0.25, c, b) + 1e-9);
    }
  }
}

TEST_CASE("homogeneity") {
  const CellPair pairs[] = {{{0.0, 1.0}, {0.5, 2.0}}, {{0.2, 3.0}, {0.9, 1.0}}};
  const CellPair same[] = {{{0.4, 1.0}, {0.4, 2.0}}};
  CHECK(homogeneity_check(mm, 1.0, pairs) == 0.0);
  CHECK(homogeneity_check(gbm, 2.0, same) == 0.0);
  CHECK(homogeneity_check(mm, 2.0, pairs) < 1e-9);
  CHECK(homogeneity_check(gbm, 2.0, pairs) < 1e-13);
  const MeasureOracle mc = MeasureOracle::pareto_gbm(ExpectationMethod::monte_carlo, 64, 1'000'000, 8);
  CHECK(homogeneity_check(mc, 2.0, pairs) < 1e-2);
}
