#include "funcevt/tail_process.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace funcevt {

namespace {

void check_index(const GridTable& paths, std::size_t t_index) {
  if (t_index >= paths.grid().size()) {
    throw std::out_of_range("tail process: time index " + std::to_string(t_index) + " out of range");
  }
}

void check_k(std::size_t n, std::size_t k) {
  if (k < 1 || k + 1 > n) throw std::invalid_argument("tail process: need 1 <= k <= n-1");
}

// Count of entries >= x in an ascending column.
std::size_t count_at_least(std::span<const double> sorted, double x) {
  return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), x));
}

double w_from_count(std::size_t count, std::size_t n, std::size_t k, double x) {
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return std::sqrt(kk) * ((nn / kk) * static_cast<double>(count) / nn - 1.0 / x);
}

}  // namespace

double tail_counts(const ParetoPaths& paths, std::size_t t_index, double x) {
  check_index(paths, t_index);
  if (!(x > 0.0)) throw std::invalid_argument("tail_counts: x must be positive");
  const auto col = paths.column(t_index);
  const auto count = std::count_if(col.begin(), col.end(), [x](double z) { return z >= x; });
  return static_cast<double>(count) / static_cast<double>(col.size());
}

double tail_empirical(const ParetoPaths& paths, std::size_t k, std::size_t t_index, double x) {
  check_index(paths, t_index);
  check_k(paths.paths(), k);
  if (!(x > 0.0)) throw std::invalid_argument("tail_empirical: x must be positive");
  const double n = static_cast<double>(paths.paths());
  const double kk = static_cast<double>(k);
  const double s = tail_counts(paths, t_index, x * n / kk);
  return std::sqrt(kk) * ((n / kk) * s - 1.0 / x);
}

std::vector<double> tail_xgrid(std::size_t n, std::size_t k, double c, std::size_t count) {
  check_k(n, k);
  const double top = static_cast<double>(n) / static_cast<double>(k);
  if (!(top > c)) throw std::invalid_argument("tail_xgrid: n/k must exceed c");
  return geometric_grid(c, top, count);
}

TailField tail_field(const ParetoPaths& paths, std::size_t k, double beta, double c,
                     std::vector<double> xgrid) {
  if (!(beta >= 0.0 && beta < 0.5)) throw std::invalid_argument("tail_field: beta must lie in [0, 1/2)");
  if (!(c > 0.0)) throw std::invalid_argument("tail_field: c must be positive");
  check_k(paths.paths(), k);
  for (double x : xgrid) {
    if (!(x >= c)) throw std::invalid_argument("tail_field: x-grid values must be >= c");
  }
  TailField f;
  f.tgrid = paths.grid();
  f.n = paths.paths();
  f.k = k;
  f.beta = beta;
  f.c = c;
  f.values = Matrix(f.tgrid.size(), xgrid.size());
  const double scale = static_cast<double>(f.n) / static_cast<double>(k);
  std::vector<double> sorted;
  for (std::size_t j = 0; j < f.tgrid.size(); ++j) {
    const auto col = paths.column(j);
    sorted.assign(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < xgrid.size(); ++i) {
      f.values(j, i) = w_from_count(count_at_least(sorted, xgrid[i] * scale), f.n, k, xgrid[i]);
    }
  }
  f.xgrid = std::move(xgrid);
  return f;
}

double weighted_sup_distance(const TailField& field, const Matrix& limit_values) {
  if (limit_values.rows() != field.values.rows() || limit_values.cols() != field.values.cols()) {
    throw std::invalid_argument("weighted_sup_distance: grid mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < field.xgrid.size(); ++i) {
    const double weight = std::pow(field.xgrid[i], field.beta);
    for (std::size_t j = 0; j < field.tgrid.size(); ++j) {
      worst = std::max(worst, weight * std::abs(field.values(j, i) - limit_values(j, i)));
    }
  }
  return worst;
}

double weighted_sup_distance(const TailField& field, const LimitField& limit,
                             const FieldDraw& draw) {
  if (!(limit.tgrid() == field.tgrid) || limit.xgrid() != field.xgrid) {
    throw std::invalid_argument("weighted_sup_distance: tail field and limit field grids differ");
  }
  return weighted_sup_distance(field, draw.values);
}

std::vector<double> quantile_stat(const ParetoPaths& paths, std::size_t k,
                                  std::span<const double> alpha) {
  const std::size_t n = paths.paths();
  check_k(n, k);
  if (alpha.size() != paths.grid().size()) {
    throw std::invalid_argument("quantile_stat: alpha must have one value per grid point");
  }
  const double kk = static_cast<double>(k);
  std::vector<double> out(alpha.size());
  std::vector<double> work;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const auto col = paths.column(j);
    work.assign(col.begin(), col.end());
    const auto pivot = work.begin() + static_cast<std::ptrdiff_t>(n - k - 1);
    std::nth_element(work.begin(), pivot, work.end());
    const double scaled = *pivot * kk / static_cast<double>(n);
    out[j] = std::sqrt(kk) * (std::pow(scaled, alpha[j]) - 1.0);
  }
  return out;
}

void OscillationConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("oscillation: delta must lie in (0,1)");
  if (!(v > 1.0)) throw std::invalid_argument("oscillation: v must exceed 1");
  if (!(K > 0.0)) throw std::invalid_argument("oscillation: K must be positive");
  if (!(beta >= 0.0 && beta < 0.5)) throw std::invalid_argument("oscillation: beta must lie in [0, 1/2)");
}

OscillationResult oscillation_diagnostic(const ParetoPaths& paths, const OscillationConfig& cfg) {
  cfg.validate();
  const TimeGrid& grid = paths.grid();
  constexpr double slack = 1e-12;
  std::vector<std::size_t> window;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] >= cfg.s - slack && grid[j] <= cfg.s + cfg.delta + slack) window.push_back(j);
  }
  if (window.size() < 2) {
    throw std::invalid_argument("oscillation: [s, s+delta] must contain at least two grid points");
  }
  const double log_inv = std::log(1.0 / cfg.delta);
  OscillationResult r;
  r.threshold = cfg.K * std::pow(log_inv, -3.0);
  r.bound = cfg.c1 * std::pow(log_inv, -(2.0 + 2.0 * cfg.beta) / (1.0 - 2.0 * cfg.beta));
  for (std::size_t i = 0; i < paths.paths(); ++i) {
    const auto& vals = paths.values();
    double sup = 0.0;
    for (std::size_t j : window) sup = std::max(sup, vals(i, j));
    if (sup < cfg.v) continue;
    ++r.conditioning;
    const double anchor = vals(i, window.front());
    bool inside = true;
    for (std::size_t j : window) {
      const double h = vals(i, j);
      const double osc = cfg.variant == OscillationVariant::ratio ? std::abs(h - anchor) / anchor
                                                                  : std::abs(std::log(h / anchor));
      if (osc > r.threshold) {
        inside = false;
        break;
      }
    }
    if (!inside) ++r.violations;
  }
  if (r.conditioning == 0) {
    throw InsufficientExceedances("oscillation: no path exceeds v = " + format_double(cfg.v) +
                                  " on [s, s+delta]");
  }
  r.estimate = static_cast<double>(r.violations) / static_cast<double>(r.conditioning);
  return r;
}

}  // namespace funcevt
