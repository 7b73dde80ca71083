#include <doctest.h>

#include <cmath>
#include <sstream>

#include "funcevt/estimators.hpp"
#include "funcevt/limit_theory.hpp"
#include "funcevt/numerics.hpp"
#include "funcevt/process_sim.hpp"

using namespace funcevt;

namespace {

GridTable column(std::vector<double> values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
  return GridTable(make_grid(1), std::move(m));
}

const double e = std::exp(1.0);

}  // namespace

TEST_CASE("hand example {1, e, e^2, e^3} with k = 2") {
  const GridTable s = column({e * e, 1.0, e * e * e, e});
  CHECK(moment_stat(s, 0, 2, 1) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(moment_stat(s, 0, 2, 2) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(gamma_plus(s, 0, 2) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(gamma_minus(s, 0, 2) == doctest::Approx(-4.0).epsilon(1e-13));
  CHECK(gamma_hat(s, 0, 2) == doctest::Approx(-2.5).epsilon(1e-13));
  CHECK(location_hat(s, 0, 2) == doctest::Approx(e).epsilon(1e-15));
  CHECK(scale_hat(s, 0, 2) == doctest::Approx(7.5 * e).epsilon(1e-13));
}

TEST_CASE("order statistics") {
  CHECK(order_stats_at(column({3, 1, 2}), 0) == std::vector<double>{1, 2, 3});
  CHECK(order_stats_at(column({4, 4, 4}), 0) == std::vector<double>{4, 4, 4});
  CHECK_THROWS_AS(order_stats_at(column({1, 2}), 1), std::out_of_range);

  SimConfig cfg;
  cfg.n = 10000;
  cfg.seed = 21;
  const PathSample s = simulate_pareto_gbm(make_grid(1), cfg);
  const double u = order_stats_at(s, 0)[cfg.n - 100 - 1];
  CHECK(u > 70.0);
  CHECK(u < 140.0);
}

TEST_CASE("degenerate tails") {
  const GridTable flat = column({1, 2, 5, 5, 5});
  CHECK(moment_stat(flat, 0, 2, 1) == 0.0);
  CHECK(moment_stat(flat, 0, 2, 2) == 0.0);
  CHECK(gamma_plus(flat, 0, 2) == 0.0);
  CHECK_THROWS_AS(gamma_minus(flat, 0, 2), DegenerateTail);
  CHECK_THROWS_AS(gamma_hat(flat, 0, 2), DegenerateTail);
  CHECK_THROWS_AS(scale_hat(flat, 0, 2), DegenerateTail);

  const std::vector<double> sorted = {1, 2, 5, 5, 5};
  const PointEstimates p = estimate_sorted(sorted, 2);
  CHECK(p.degenerate);
  CHECK(p.a_hat == 0.0);

  const EstimatorCurves c = estimate_curves(flat, 2);
  CHECK(c.flagged() == 1);
  CHECK(c.flags[0] == PointFlag::degenerate_tail);
}

TEST_CASE("argument checks") {
  const GridTable s = column({1, 2, 3});
  CHECK_THROWS_AS(gamma_plus(s, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_plus(s, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(moment_stat(s, 0, 1, 3), std::invalid_argument);
}

TEST_CASE("scale invariance and top-order dependence") {
  SimConfig cfg;
  cfg.n = 500;
  cfg.seed = 22;
  const PathSample s = simulate_pareto_gbm(make_grid(3), cfg);
  Matrix scaled = s.values();
  Matrix bottom_changed = s.values();
  for (std::size_t j = 0; j < 3; ++j) {
    auto col = scaled.column(j);
    for (double& x : col) x *= 3.5;
    // Pushing the smallest value further down leaves the top k+1 untouched.
    auto b = bottom_changed.column(j);
    *std::min_element(b.begin(), b.end()) *= 0.5;
  }
  const auto base = estimate_curves(s, 40);
  const auto sc = estimate_curves(GridTable(s.grid(), scaled), 40);
  const auto bc = estimate_curves(GridTable(s.grid(), bottom_changed), 40);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(sc.gamma_plus[j] == doctest::Approx(base.gamma_plus[j]).epsilon(1e-12));
    CHECK(sc.gamma_minus[j] == doctest::Approx(base.gamma_minus[j]).epsilon(1e-10));
    CHECK(sc.u_hat[j] == doctest::Approx(3.5 * base.u_hat[j]).epsilon(1e-14));
    CHECK(sc.a_hat[j] == doctest::Approx(3.5 * base.a_hat[j]).epsilon(1e-10));
    CHECK(bc.gamma[j] == base.gamma[j]);
    CHECK(base.gamma[j] == base.gamma_plus[j] + base.gamma_minus[j]);
    CHECK(base.gamma_plus[j] >= 0.0);
    CHECK(base.a_hat[j] > 0.0);
  }
}

TEST_CASE("estimate_curves on a one-point grid matches the scalar estimators") {
  const GridTable s = column({e * e, 1.0, e * e * e, e});
  const EstimatorCurves c = estimate_curves(s, 2);
  CHECK(c.gamma_plus[0] == gamma_plus(s, 0, 2));
  CHECK(c.gamma_minus[0] == gamma_minus(s, 0, 2));
  CHECK(c.u_hat[0] == location_hat(s, 0, 2));
  CHECK(c.a_hat[0] == scale_hat(s, 0, 2));
  std::ostringstream out;
  write_curves_csv(out, c);
  CHECK(out.str().rfind("t,gamma_plus,gamma_minus,gamma,u_hat,a_hat,flag\n0,1.5,", 0) == 0);
}

TEST_CASE("gamma_minus vanishes on exact Pareto tails") {
  SimConfig cfg;
  cfg.n = 100000;
  cfg.seed = 23;
  const PathSample s = simulate_pareto_gbm(make_grid(1), cfg);
  CHECK(std::abs(gamma_minus(s, 0, 500)) < 0.15);
}

TEST_CASE("moving-max moment estimator is consistent") {
  SimConfig cfg;
  cfg.n = 10000;
  cfg.seed = 24;
  const PathSample one = simulate_moving_max(KernelSpec::double_exponential(), make_grid(1), cfg);
  CHECK(std::abs(gamma_hat(one, 0, 100) - 1.0) < 0.4);

  cfg.n = 8000;
  const PathSample s = simulate_moving_max(KernelSpec::double_exponential(), make_grid(51), cfg);
  const EstimatorCurves c = estimate_curves(s, 200);
  double worst = 0;
  for (double g : c.gamma) worst = std::max(worst, std::abs(g - 1.0));
  CHECK(worst < 0.5);
}

TEST_CASE("Pareto-GBM scale estimate tracks a_t(n/k)") {
  SimConfig cfg;
  cfg.n = 8000;
  cfg.seed = 25;
  const TimeGrid g = make_grid(11);
  const PathSample s = simulate_pareto_gbm(g, cfg);
  const EstimatorCurves c = estimate_curves(s, 200);
  const TrueFunctions truth = true_functions(Family::pareto_gbm);
  double worst = 0;
  for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(c.a_hat[j] / truth.a(g[j], 40.0) - 1.0));
  CHECK(worst < 0.5);
}

TEST_CASE("Hill estimator averages to 1 on exact Pareto samples") {
  double acc = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    SimConfig cfg;
    cfg.n = 10000;
    cfg.seed = split_seed(26, r);
    acc += gamma_plus(simulate_pareto_gbm(make_grid(1), cfg), 0, 100);
  }
  CHECK(std::abs(acc / 200 - 1.0) < 0.05);
}
