#include <doctest.h>

#include <cmath>

#include "funcevt/exponent_measure.hpp"
#include "funcevt/limit_theory.hpp"
#include "funcevt/numerics.hpp"
#include "funcevt/process_sim.hpp"
#include "funcevt/tail_process.hpp"

using namespace funcevt;

namespace {

ParetoPaths column(std::vector<double> values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
  return ParetoPaths(make_grid(1), std::move(m));
}

ParetoPaths simulated(Family family, std::size_t m, std::size_t n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  const KernelSpec kernel = KernelSpec::double_exponential();
  MarginalModel model;
  model.family = family;
  return pareto_transform(simulate(family, kernel, make_grid(m), cfg), model);
}

}  // namespace

TEST_CASE("tail counts") {
  const ParetoPaths z = column({1, 2, 3, 8});
  CHECK(tail_counts(z, 0, 2.0) == 0.75);
  CHECK(tail_counts(z, 0, 0.5) == 1.0);
  CHECK(tail_counts(z, 0, 9.0) == 0.0);
}

TEST_CASE("tail empirical process by hand") {
  const ParetoPaths z = column({1, 2, 3, 8});
  CHECK(tail_empirical(z, 2, 0, 1.0) == doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-15));
  CHECK(tail_empirical(z, 2, 0, 4.0) == doctest::Approx(std::sqrt(2.0) * 0.25).epsilon(1e-15));
  CHECK(tail_empirical(z, 2, 0, 5.0) == doctest::Approx(-std::sqrt(2.0) / 5.0).epsilon(1e-15));
  CHECK_THROWS_AS(tail_empirical(z, 4, 0, 1.0), std::invalid_argument);

  const TailField f = tail_field(z, 2, 0.25, 1.0, {1.0, 4.0, 5.0});
  CHECK(f.values(0, 0) == tail_empirical(z, 2, 0, 1.0));
  CHECK(f.values(0, 1) == tail_empirical(z, 2, 0, 4.0));
  CHECK(f.values(0, 2) == tail_empirical(z, 2, 0, 5.0));
  CHECK_THROWS_AS(tail_field(z, 2, 0.5, 1.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(tail_field(z, 2, 0.25, 2.0, {1.0}), std::invalid_argument);
}

TEST_CASE("default x-grid spans [c, n/k]") {
  const auto xs = tail_xgrid(1000, 10, 1.0);
  CHECK(xs.size() == 64);
  CHECK(xs.front() == 1.0);
  CHECK(xs.back() == doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("weighted sup distance") {
  const ParetoPaths z = column({1, 2, 3, 8});
  const TailField f = tail_field(z, 2, 0.25, 1.0, {1.0, 4.0});
  CHECK(weighted_sup_distance(f, f.values) == 0.0);

  TailField one;
  one.tgrid = make_grid(1);
  one.xgrid = {4.0};
  one.values = Matrix(1, 1, 1.0);
  one.beta = 0.25;
  CHECK(weighted_sup_distance(one, Matrix(1, 1, 0.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(weighted_sup_distance(one, Matrix(1, 2, 0.0)), std::invalid_argument);

  const LimitField limit(MeasureOracle::moving_max(KernelSpec::double_exponential()), make_grid(1), {4.0, 8.0});
  Engine rng(1);
  CHECK_THROWS_AS(weighted_sup_distance(one, limit, limit.sample(rng)), std::invalid_argument);
}

TEST_CASE("quantile statistic") {
  const ParetoPaths z = column({1, 2, 3, 8});
  for (double a : {-1.0, 0.0, 0.5, 2.0}) {
    const double alpha[] = {a};
    CHECK(quantile_stat(z, 2, alpha)[0] == 0.0);
  }
  const ParetoPaths s = simulated(Family::pareto_gbm, 4, 1000, 3);
  const std::vector<double> zero(4, 0.0);
  for (double q : quantile_stat(s, 30, zero)) CHECK(q == 0.0);
  CHECK_THROWS_AS(quantile_stat(s, 30, std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST_CASE("oscillation diagnostic on constant paths") {
  Matrix m(10, 5, 20.0);
  const ParetoPaths z(make_grid(5), m);
  OscillationConfig cfg;
  cfg.s = 0.0;
  cfg.delta = 0.5;
  cfg.v = 10.0;
  const auto r = oscillation_diagnostic(z, cfg);
  CHECK(r.estimate == 0.0);
  CHECK(r.conditioning == 10);
  CHECK(r.bound == doctest::Approx(std::pow(std::log(2.0), -5.0)));

  cfg.v = 50.0;
  CHECK_THROWS_AS(oscillation_diagnostic(z, cfg), InsufficientExceedances);
  cfg.v = 10.0;
  cfg.delta = 0.1;
  CHECK_THROWS_AS(oscillation_diagnostic(z, cfg), std::invalid_argument);
  cfg.delta = 1.5;
  CHECK_THROWS_AS(oscillation_diagnostic(z, cfg), std::invalid_argument);
}

TEST_CASE("oscillation diagnostic is zero on moving-max samples") {
  const KernelSpec kernel = KernelSpec::double_exponential();
  const ParetoPaths z = simulated(Family::moving_max, 101, 5000, 4);
  for (auto variant : {OscillationVariant::ratio, OscillationVariant::log}) {
    for (double s : {0.0, 0.37, 0.9}) {
      OscillationConfig cfg;
      cfg.s = s;
      cfg.delta = 0.05;
      cfg.v = 5.0;
      cfg.K = kernel.oscillation_constant(cfg.delta);
      cfg.variant = variant;
      const auto r = oscillation_diagnostic(z, cfg);
      CHECK(r.conditioning > 0);
      CHECK(r.violations == 0);
    }
  }
}

TEST_CASE("tail empirical process has mean 0 and variance 1/x on exact Pareto columns") {
  const std::size_t reps = 2000, n = 5000, k = 200;
  std::vector<std::vector<double>> w(3);
  const double xs[] = {1.0, 2.0, 4.0};
  for (std::size_t r = 0; r < reps; ++r) {
    const ParetoPaths z = simulated(Family::pareto_gbm, 1, n, split_seed(5, r));
    for (std::size_t i = 0; i < 3; ++i) w[i].push_back(tail_empirical(z, k, 0, xs[i]));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = variance(w[i]);
    CHECK(std::abs(mean(w[i])) < 3 * std::sqrt(v / reps));
    CHECK(std::abs(v * xs[i] - 1.0) < 0.15);
  }
}

TEST_CASE("weighted sup distance to an independent limit draw shrinks with n") {
  const KernelSpec kernel = KernelSpec::double_exponential();
  const MeasureOracle oracle = MeasureOracle::moving_max(kernel);
  const std::vector<double> xgrid = geometric_grid(1.0, 20.0, 12);
  const LimitField limit(oracle, make_grid(3), xgrid);
  std::vector<double> medians;
  for (std::size_t n : {1000u, 10000u}) {
    const auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    std::vector<double> d;
    for (std::uint64_t r = 0; r < 50; ++r) {
      const ParetoPaths z = simulated(Family::moving_max, 3, n, split_seed(6 + n, r));
      Engine rng(split_seed(7 + n, r));
      d.push_back(weighted_sup_distance(tail_field(z, k, 0.25, 1.0, xgrid), limit, limit.sample(rng)));
    }
    medians.push_back(median(d));
  }
  MESSAGE("median distance n=1e3: " << medians[0] << ", n=1e4: " << medians[1]);
  CHECK(medians[1] < medians[0]);
}
