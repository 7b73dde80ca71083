#include "funcevt/process_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "funcevt/exponent_measure.hpp"

namespace funcevt {

void SimConfig::validate() const {
  if (n < 1) throw std::invalid_argument("SimConfig: n must be at least 1");
  if (!(eps_trunc > 0.0 && eps_trunc < 1.0)) {
    throw std::invalid_argument("SimConfig: eps_trunc must lie in (0,1)");
  }
  if (window < 0.0 || !std::isfinite(window)) {
    throw std::invalid_argument("SimConfig: window must be finite and >= 0");
  }
}

double required_window(const KernelSpec& kernel, double eps_trunc) {
  return kernel.tail_quantile(eps_trunc * eps_trunc);
}

std::vector<double> moving_max_path(const KernelSpec& kernel, const TimeGrid& grid,
                                    std::span<const PoissonPoint> points) {
  std::vector<double> out(grid.size(), 0.0);
  for (const auto& p : points) {
    if (!(p.y > 0.0)) throw std::invalid_argument("moving_max_path: Y must be positive");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      out[j] = std::max(out[j], kernel.density(grid[j] + p.x) / p.y);
    }
  }
  return out;
}

PathSample simulate_moving_max(const KernelSpec& kernel, const TimeGrid& grid,
                               const SimConfig& cfg) {
  kernel.validate();
  cfg.validate();
  const double needed = required_window(kernel, cfg.eps_trunc);
  double half_width = cfg.window;
  if (half_width == 0.0) {
    half_width = needed;
  } else if (half_width < needed) {
    throw std::invalid_argument("simulate_moving_max: window half-width " +
                                format_double(half_width) + " is below " + format_double(needed) +
                                " required for eps_trunc " + format_double(cfg.eps_trunc));
  }

  const double peak = kernel.peak();
  const double rate = 1.0 + peak;  // integral of g over the real line
  const std::size_t m = grid.size();
  Engine rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(rate);

  Matrix values(cfg.n, m);
  std::vector<double> path(m);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    std::fill(path.begin(), path.end(), 0.0);
    double floor_value = 0.0;  // min_t xi(t) so far
    double v = 0.0;
    while (true) {
      v += expo(rng);
      if (floor_value > 0.0 && 1.0 / v <= floor_value) break;
      const double pick = unif(rng) * rate;
      double x = 0.0;
      double g = peak;
      if (pick < peak) {
        x = -unif(rng);
      } else {
        const double a = kernel.sample_abs(rng);
        if (a > half_width) continue;  // outside the window
        x = (pick < peak + 0.5) ? a : -1.0 - a;
        g = kernel.density(a);
      }
      const double y = v * g;
      floor_value = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) {
        path[j] = std::max(path[j], kernel.density(grid[j] + x) / y);
        floor_value = std::min(floor_value, path[j]);
      }
    }
    for (std::size_t j = 0; j < m; ++j) values(i, j) = path[j];
  }
  return PathSample(grid, std::move(values), Family::moving_max);
}

PathSample simulate_pareto_gbm(const TimeGrid& grid, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t m = grid.size();
  std::vector<double> step_sd(m);
  for (std::size_t j = 0; j < m; ++j) {
    step_sd[j] = std::sqrt(grid[j] - (j == 0 ? 0.0 : grid[j - 1]));
  }
  Engine rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix values(cfg.n, m);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double y = 1.0 / (1.0 - unif(rng));
    double w = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (step_sd[j] > 0.0) w += step_sd[j] * normal(rng);
      values(i, j) = y * std::exp(w - 0.5 * grid[j]);
    }
  }
  return PathSample(grid, std::move(values), Family::pareto_gbm);
}

PathSample simulate(Family family, const KernelSpec& kernel, const TimeGrid& grid,
                    const SimConfig& cfg) {
  return family == Family::moving_max ? simulate_moving_max(kernel, grid, cfg)
                                      : simulate_pareto_gbm(grid, cfg);
}

MaxCheckReport empirical_max_check(Family family, const KernelSpec& kernel,
                                   std::span<const double> times,
                                   std::span<const double> levels, std::size_t n,
                                   std::size_t reps, std::uint64_t seed) {
  if (times.size() != levels.size() || times.empty()) {
    throw std::invalid_argument("empirical_max_check: need matching non-empty times and levels");
  }
  for (double x : levels) {
    if (!(x > 0.0)) throw std::invalid_argument("empirical_max_check: levels must be positive");
  }
  if (reps == 0) throw std::invalid_argument("empirical_max_check: reps must be positive");
  const TimeGrid grid = make_grid(std::vector<double>(times.begin(), times.end()));

  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    SimConfig cfg;
    cfg.n = n;
    cfg.seed = split_seed(seed, r);
    const PathSample sample = simulate(family, kernel, grid, cfg);
    bool inside = true;
    for (std::size_t j = 0; j < grid.size() && inside; ++j) {
      const auto col = sample.column(j);
      const double mx = *std::max_element(col.begin(), col.end());
      inside = mx / static_cast<double>(n) <= levels[j];
    }
    hits += inside ? 1 : 0;
  }

  const MeasureOracle oracle = family == Family::moving_max
                                   ? MeasureOracle::moving_max(kernel)
                                   : MeasureOracle::pareto_gbm();
  MaxCheckReport report;
  report.reps = reps;
  report.empirical = static_cast<double>(hits) / static_cast<double>(reps);
  report.limit = std::exp(-nu_union(oracle, times, levels));
  report.deviation = std::abs(report.empirical - report.limit);
  report.std_error = std::sqrt(report.limit * (1.0 - report.limit) / static_cast<double>(reps));
  return report;
}

}  // namespace funcevt
