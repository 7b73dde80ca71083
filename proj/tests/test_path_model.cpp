#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "funcevt/numerics.hpp"
#include "funcevt/path_model.hpp"
#include "funcevt/process_sim.hpp"

using namespace funcevt;

namespace {

std::vector<double> points(const TimeGrid& g) { return {g.points().begin(), g.points().end()}; }

}  // namespace

TEST_CASE("make_grid") {
  CHECK(points(make_grid(1)) == std::vector<double>{0.0});
  CHECK(points(make_grid(2)) == std::vector<double>{0.0, 1.0});
  CHECK(points(make_grid(3)) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(make_grid(std::vector<double>{0.2, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(std::vector<double>{0.0, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0), std::invalid_argument);
  CHECK(make_grid(std::vector<double>{0.1, 0.4}).nearest(0.3) == 1);
}

TEST_CASE("marginal_cdf examples") {
  MarginalModel mm{Family::moving_max};
  CHECK(marginal_cdf(mm, 0.3, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(marginal_cdf(mm, 0.0, 0.0), std::invalid_argument);

  MarginalModel gbm{Family::pareto_gbm};
  CHECK(marginal_cdf(gbm, 0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("Pareto-GBM marginal at t=1, x=10 against a Monte Carlo oracle") {
  MarginalModel closed{Family::pareto_gbm};
  MarginalModel hermite{Family::pareto_gbm, ExpectationMethod::gauss_hermite, 64};
  const double F = marginal_cdf(closed, 1.0, 10.0);

  Engine rng(2024);
  std::normal_distribution<double> z;
  const std::size_t draws = 1'000'000;
  double acc = 0, acc2 = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double v = std::min(std::exp(z(rng) - 0.5) / 10.0, 1.0);
    acc += v;
    acc2 += v * v;
  }
  const double mc = acc / draws;
  const double se = std::sqrt((acc2 / draws - mc * mc) / draws);
  CHECK(std::abs((1.0 - F) - mc) < 4 * se);
  CHECK(marginal_cdf(hermite, 1.0, 10.0) == doctest::Approx(F).epsilon(1e-4));
  // Upper end of the bracket holds for every x.
  CHECK(F >= 1.0 - 0.1);
}

TEST_CASE("Pareto-GBM tail bracket for large x") {
  // At t = 1 and M = 1.5 the lower bracket takes hold from x of order 1e3.
  MarginalModel gbm{Family::pareto_gbm};
  const double M = gbm.bound_exponent;
  for (double t : {0.25, 0.5, 1.0}) {
    for (double x : {1e3, 1e4, 1e5}) {
      const double xs = x * gbm.tail(t, x);
      CHECK(xs <= 1.0);
      CHECK(xs >= 1.0 - std::pow(x, -(M + 2.0)));
    }
  }
}

TEST_CASE("pareto_transform examples") {
  const TimeGrid g = make_grid(1);
  Matrix v(3, 1);
  v(0, 0) = 1.0;
  v(1, 0) = 1e12;
  v(2, 0) = 0.5;
  const ParetoPaths z = pareto_transform(PathSample(g, v, Family::moving_max), MarginalModel{Family::moving_max});
  CHECK(z.values()(0, 0) == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-14));
  CHECK(z.values()(1, 0) / 1e12 == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(z.values()(2, 0) < z.values()(0, 0));
  for (double x : z.values().data()) CHECK(x >= 1.0);

  Matrix w(1, 1);
  w(0, 0) = 5.0;
  const ParetoPaths zg = pareto_transform(PathSample(g, w, Family::pareto_gbm), MarginalModel{Family::pareto_gbm});
  CHECK(zg.values()(0, 0) == doctest::Approx(5.0).epsilon(1e-15));

  CHECK_THROWS_AS(pareto_transform(PathSample(g, w, Family::pareto_gbm), MarginalModel{Family::moving_max}),
                  std::invalid_argument);
}

TEST_CASE("pareto_transform is increasing and clamps underflowed tails") {
  MarginalModel gbm{Family::pareto_gbm};
  const TimeGrid g = make_grid(std::vector<double>{0.5});
  Matrix v(4, 1);
  v(0, 0) = 1.5;
  v(1, 0) = 3.0;
  v(2, 0) = 30.0;
  v(3, 0) = 1e300;
  const ParetoPaths z = pareto_transform(PathSample(g, v, Family::pareto_gbm), gbm);
  CHECK(z.values()(0, 0) < z.values()(1, 0));
  CHECK(z.values()(1, 0) < z.values()(2, 0));
  CHECK(z.values()(2, 0) <= z.values()(3, 0));
  CHECK(std::isfinite(z.values()(3, 0)));
}

TEST_CASE("moving-max transformed column is standard Pareto") {
  SimConfig cfg;
  cfg.n = 10000;
  cfg.seed = 11;
  const PathSample s = simulate_moving_max(KernelSpec::double_exponential(), make_grid(3), cfg);
  const ParetoPaths z = pareto_transform(s, MarginalModel{Family::moving_max});
  for (std::size_t j = 0; j < 3; ++j) {
    const auto col = z.column(j);
    const double d = ks_statistic({col.begin(), col.end()}, [](double x) { return x < 1 ? 0.0 : 1.0 - 1.0 / x; });
    CHECK(d < 0.02);
  }
}

TEST_CASE("CSV round trip is exact") {
  SimConfig cfg;
  cfg.n = 20;
  cfg.seed = 5;
  const PathSample s = simulate_pareto_gbm(make_grid(4), cfg);
  std::stringstream buf;
  write_csv(buf, s);
  const GridTable back = read_csv(buf);
  CHECK(back.grid() == s.grid());
  CHECK(back.values() == s.values());

  std::stringstream bad("0,1\n1,2,3\n");
  CHECK_THROWS(read_csv(bad));
}

TEST_CASE("PathSample rejects nonpositive values") {
  Matrix v(1, 1);
  v(0, 0) = 0.0;
  CHECK_THROWS_AS(PathSample(make_grid(1), v, Family::moving_max), std::invalid_argument);
  CHECK_THROWS_AS(ParetoPaths(make_grid(1), v), std::invalid_argument);
}
