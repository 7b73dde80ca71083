#ifndef FUNCEVT_NUMERICS_HPP
#define FUNCEVT_NUMERICS_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace funcevt {

/// Pseudo-random engine used everywhere in the library.
using Engine = std::mt19937_64;

/// Counter-based seed derivation: hash64(master || index).
///
/// Two splitmix64 finalizer rounds over the pair; streams derived for
/// different indices are independent of the order in which they are
/// requested, which is what makes replication-level parallelism
/// reproducible.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

/// Raised when an adaptive integrator cannot meet its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double normal_cdf(double x);
double normal_sf(double x);  // 1 - Phi(x), accurate in the upper tail
double normal_quantile(double p);

/// Nodes and weights of a quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for expectations under N(0,1): sum_i w_i f(z_i)
/// approximates E f(Z). Weights sum to one. Built by Golub-Welsch.
QuadratureRule gauss_hermite_rule(std::size_t n);

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre_rule(std::size_t n);

/// Adaptive Gauss-Kronrod integral of f over [a, b]; either end may be
/// infinite. Throws QuadratureError when the error estimate exceeds
/// abs_tol + rel_tol * |result|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-10);

/// Sample mean / unbiased variance / covariance.
double mean(std::span<const double> xs);
double variance(std::span<const double> xs);
double covariance(std::span<const double> xs, std::span<const double> ys);
double median(std::vector<double> xs);

/// Linear-interpolated sample quantile (type 7).
double quantile(std::vector<double> xs, double p);

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
/// xs and a continuous CDF.
double ks_statistic(std::vector<double> xs,
                    const std::function<double(double)>& cdf);

/// Asymptotic p-value of the KS statistic d for sample size n, with
/// Stephens' small-sample correction.
double ks_pvalue(double d, std::size_t n);

}  // namespace funcevt

#endif  // FUNCEVT_NUMERICS_HPP
