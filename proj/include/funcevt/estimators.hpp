#ifndef FUNCEVT_ESTIMATORS_HPP
#define FUNCEVT_ESTIMATORS_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "funcevt/path_model.hpp"

namespace funcevt {

/// The top k+1 order statistics do not determine a finite estimate:
/// M2 = 0, or (M1)^2 = M2 so that the moment estimator divides by zero.
class DegenerateTail : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Sorted copy (nondecreasing) of column t_index.
std::vector<double> order_stats_at(const GridTable& sample, std::size_t t_index);

/// M^(r) = (1/k) sum_{i<k} (log xi_{n-i,n} - log xi_{n-k,n})^r, r in {1,2}.
double moment_stat(const GridTable& sample, std::size_t t_index, std::size_t k, int r);

double gamma_plus(const GridTable& sample, std::size_t t_index, std::size_t k);
double gamma_minus(const GridTable& sample, std::size_t t_index, std::size_t k);
double gamma_hat(const GridTable& sample, std::size_t t_index, std::size_t k);
double location_hat(const GridTable& sample, std::size_t t_index, std::size_t k);
double scale_hat(const GridTable& sample, std::size_t t_index, std::size_t k);

/// All estimators at one time from a sorted column.
struct PointEstimates {
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  double gamma = 0.0;
  double u_hat = 0.0;
  double a_hat = 0.0;
  bool degenerate = false;  // gamma_minus / gamma / a_hat are NaN (a_hat = 0 if gamma_plus = 0)
};

/// Throws std::invalid_argument unless 1 <= k <= n-1 and the top k+1
/// values are positive.
PointEstimates estimate_sorted(std::span<const double> sorted, std::size_t k);

enum class PointFlag { ok = 0, degenerate_tail = 1 };

struct EstimatorCurves {
  TimeGrid grid = make_grid(1);
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> gamma_plus;
  std::vector<double> gamma_minus;
  std::vector<double> gamma;
  std::vector<double> u_hat;
  std::vector<double> a_hat;
  std::vector<PointFlag> flags;

  std::size_t flagged() const;
};

/// The five estimators at every grid point; one sort per column.
/// Degenerate points are flagged rather than thrown.
EstimatorCurves estimate_curves(const GridTable& sample, std::size_t k);

/// CSV columns: t, gamma_plus, gamma_minus, gamma, u_hat, a_hat, flag.
void write_curves_csv(std::ostream& out, const EstimatorCurves& curves);

}  // namespace funcevt

#endif  // FUNCEVT_ESTIMATORS_HPP
