#include "funcevt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace funcevt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_k(std::size_t n, std::size_t k) {
  if (k < 1 || k + 1 > n) {
    throw std::invalid_argument("k = " + std::to_string(k) + " must satisfy 1 <= k <= n-1 (n = " +
                                std::to_string(n) + ")");
  }
}

// Top k+1 order statistics of a column, ascending: element 0 is
// xi_{n-k,n}, element k is xi_{n,n}.
std::vector<double> upper_tail(std::span<const double> column, std::size_t k) {
  check_k(column.size(), k);
  std::vector<double> work(column.begin(), column.end());
  const auto pivot = work.begin() + static_cast<std::ptrdiff_t>(work.size() - k - 1);
  std::nth_element(work.begin(), pivot, work.end());
  std::sort(pivot, work.end());
  return std::vector<double>(pivot, work.end());
}

struct Moments {
  double m1;
  double m2;
  double threshold;
};

Moments moments_of_tail(std::span<const double> tail) {
  const double threshold = tail.front();
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("estimators: order statistics must be positive");
  }
  const double log_threshold = std::log(threshold);
  const std::size_t k = tail.size() - 1;
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double d = std::log(tail[i]) - log_threshold;
    m1 += d;
    m2 += d * d;
  }
  return {m1 / static_cast<double>(k), m2 / static_cast<double>(k), threshold};
}

PointEstimates from_moments(const Moments& mo) {
  PointEstimates e;
  e.gamma_plus = mo.m1;
  e.u_hat = mo.threshold;
  const double denom = mo.m2 > 0.0 ? 1.0 - mo.m1 * mo.m1 / mo.m2 : 0.0;
  if (!(denom > 0.0)) {
    e.degenerate = true;
    e.gamma_minus = kNaN;
    e.gamma = kNaN;
    e.a_hat = e.gamma_plus == 0.0 ? 0.0 : kNaN;
    return e;
  }
  e.gamma_minus = 1.0 - 0.5 / denom;
  e.gamma = e.gamma_plus + e.gamma_minus;
  e.a_hat = mo.threshold * e.gamma_plus * (1.0 - e.gamma_minus);
  return e;
}

PointEstimates column_estimates(const GridTable& sample, std::size_t t_index, std::size_t k) {
  if (t_index >= sample.grid().size()) {
    throw std::out_of_range("estimators: time index " + std::to_string(t_index) + " out of range");
  }
  const auto tail = upper_tail(sample.column(t_index), k);
  return from_moments(moments_of_tail(tail));
}

void throw_degenerate(std::size_t t_index) {
  throw DegenerateTail("degenerate tail at time index " + std::to_string(t_index));
}

}  // namespace

std::vector<double> order_stats_at(const GridTable& sample, std::size_t t_index) {
  if (t_index >= sample.grid().size()) {
    throw std::out_of_range("order_stats_at: time index " + std::to_string(t_index) +
                            " out of range");
  }
  const auto col = sample.column(t_index);
  std::vector<double> out(col.begin(), col.end());
  std::sort(out.begin(), out.end());
  return out;
}

double moment_stat(const GridTable& sample, std::size_t t_index, std::size_t k, int r) {
  if (r != 1 && r != 2) throw std::invalid_argument("moment_stat: r must be 1 or 2");
  if (t_index >= sample.grid().size()) throw std::out_of_range("moment_stat: time index out of range");
  const Moments mo = moments_of_tail(upper_tail(sample.column(t_index), k));
  return r == 1 ? mo.m1 : mo.m2;
}

double gamma_plus(const GridTable& sample, std::size_t t_index, std::size_t k) {
  return moment_stat(sample, t_index, k, 1);
}

double gamma_minus(const GridTable& sample, std::size_t t_index, std::size_t k) {
  const PointEstimates e = column_estimates(sample, t_index, k);
  if (e.degenerate) throw_degenerate(t_index);
  return e.gamma_minus;
}

double gamma_hat(const GridTable& sample, std::size_t t_index, std::size_t k) {
  const PointEstimates e = column_estimates(sample, t_index, k);
  if (e.degenerate) throw_degenerate(t_index);
  return e.gamma;
}

double location_hat(const GridTable& sample, std::size_t t_index, std::size_t k) {
  return column_estimates(sample, t_index, k).u_hat;
}

double scale_hat(const GridTable& sample, std::size_t t_index, std::size_t k) {
  const PointEstimates e = column_estimates(sample, t_index, k);
  if (e.degenerate) throw_degenerate(t_index);
  return e.a_hat;
}

PointEstimates estimate_sorted(std::span<const double> sorted, std::size_t k) {
  check_k(sorted.size(), k);
  return from_moments(moments_of_tail(sorted.subspan(sorted.size() - k - 1)));
}

std::size_t EstimatorCurves::flagged() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), PointFlag::degenerate_tail));
}

EstimatorCurves estimate_curves(const GridTable& sample, std::size_t k) {
  check_k(sample.paths(), k);
  const std::size_t m = sample.grid().size();
  EstimatorCurves c;
  c.grid = sample.grid();
  c.n = sample.paths();
  c.k = k;
  c.gamma_plus.resize(m);
  c.gamma_minus.resize(m);
  c.gamma.resize(m);
  c.u_hat.resize(m);
  c.a_hat.resize(m);
  c.flags.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const PointEstimates e = from_moments(moments_of_tail(upper_tail(sample.column(j), k)));
    c.gamma_plus[j] = e.gamma_plus;
    c.gamma_minus[j] = e.gamma_minus;
    c.gamma[j] = e.gamma;
    c.u_hat[j] = e.u_hat;
    c.a_hat[j] = e.a_hat;
    c.flags[j] = e.degenerate ? PointFlag::degenerate_tail : PointFlag::ok;
  }
  return c;
}

void write_curves_csv(std::ostream& out, const EstimatorCurves& curves) {
  out << "t,gamma_plus,gamma_minus,gamma,u_hat,a_hat,flag\n";
  for (std::size_t j = 0; j < curves.grid.size(); ++j) {
    out << format_double(curves.grid[j]) << ',' << format_double(curves.gamma_plus[j]) << ','
        << format_double(curves.gamma_minus[j]) << ',' << format_double(curves.gamma[j]) << ','
        << format_double(curves.u_hat[j]) << ',' << format_double(curves.a_hat[j]) << ','
        << (curves.flags[j] == PointFlag::ok ? "ok" : "degenerate") << '\n';
  }
}

}  // namespace funcevt
