#ifndef FUNCEVT_LIMIT_THEORY_HPP
#define FUNCEVT_LIMIT_THEORY_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "funcevt/exponent_measure.hpp"
#include "funcevt/numerics.hpp"
#include "funcevt/path_model.hpp"

namespace funcevt {

/// rho = -infinity: H vanishes and A_t decays faster than any power.
inline constexpr double kRhoMinusInfinity = -std::numeric_limits<double>::infinity();

/// (x^a - 1)/a, read as log x at a = 0.
double box_cox(double a, double x);

/// H_{g,rho}(x) = integral_1^x y^(g-1) integral_1^y u^(rho-1) du dy for
/// g <= 0, rho in [-inf, 0], x > 0, with the removable singularities at
/// g = 0, rho = 0 and g + rho = 0 resolved.
double H_func(double gamma_minus, double rho, double x);

/// Extreme value index and second-order index curves on a grid.
struct LimitParams {
  TimeGrid grid = make_grid(1);
  std::vector<double> gamma_plus;
  std::vector<double> gamma_minus;
  std::vector<double> rho;

  static LimitParams constant(const TimeGrid& grid, double gamma, double rho);
  double gamma(std::size_t j) const { return gamma_plus[j] + gamma_minus[j]; }
  /// Throws std::invalid_argument when sizes disagree, gamma_plus < 0,
  /// gamma_minus > 0 or rho > 0.
  void validate() const;
};

/// U_t(v) = F_t^<-(1 - 1/v), a_t(v) and the second-order function A_t(v)
/// for an example family (both have gamma == 1).
///
/// moving-max: U(v) = -1/log(1 - 1/v) = v - 1/2 - 1/(12v) + ..., so
///   log U(vx) - log U(v) - log x = (1 - 1/x)/(2v) + O(v^-2). Taking
///   a(v)/U(v) = 1 + 1/(2v) and A(v) = -1/(2v) gives the limit
///   H_{0,-1}(x) = log x + 1/x - 1 (rho = -1).
/// pareto-gbm: U by root-finding on the marginal, a = U, A(v) = v^-M,
///   rho = -infinity.
struct TrueFunctions {
  Family family = Family::moving_max;
  double bound_exponent = 1.5;

  /// log(U_t(v) / v), evaluated without forming U_t(v) first.
  double log_excess(double t, double v) const;
  double U(double t, double v) const;
  double a(double t, double v) const;
  /// a_t(v) / U_t(v).
  double a_over_U(double t, double v) const;
  double A(double t, double v) const;
  double rho(double) const { return family == Family::moving_max ? -1.0 : kRhoMinusInfinity; }
  double gamma_plus(double) const { return 1.0; }
  double gamma_minus(double) const { return 0.0; }

  LimitParams params(const TimeGrid& grid) const;
};

TrueFunctions true_functions(Family family, double bound_exponent = 1.5);

/// Raised when the covariance of the limiting field is indefinite
/// beyond tolerance.
class CovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One draw of W(C_{t,x}) on a t-grid x x-grid; values(j, i) holds
/// W(C_{t_j, x_i}).
struct FieldDraw {
  Matrix values;
};

/// Zero-mean Gaussian field with E W(C_{t,x}) W(C_{s,y}) = nu(C_{t,x} ∩ C_{s,y}),
/// sampled through a clipped symmetric eigen-factorization of the
/// covariance over all grid cells.
class LimitField {
 public:
  LimitField(const MeasureOracle& oracle, TimeGrid tgrid, std::vector<double> xgrid,
             double clip_tolerance = 1e-8);

  const TimeGrid& tgrid() const { return tgrid_; }
  const std::vector<double>& xgrid() const { return xgrid_; }
  /// Cell (j, i) maps to row j * xgrid().size() + i.
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  std::size_t clipped_eigenvalues() const { return clipped_; }

  FieldDraw sample(Engine& rng) const;

 private:
  TimeGrid tgrid_;
  std::vector<double> xgrid_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
  std::size_t clipped_ = 0;
};

std::vector<FieldDraw> simulate_limit_field(const MeasureOracle& oracle, const TimeGrid& tgrid,
                                            const std::vector<double>& xgrid, std::size_t draws,
                                            std::uint64_t seed);

/// Geometric points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

/// Default x-grid for the functional integrals: 512 geometric points on [1, 1e4].
std::vector<double> functional_xgrid(double x_max = 1e4, std::size_t count = 512);

/// Linear weights turning a draw x -> W(C_{t,x}) on an x-grid starting
/// at 1 into the integrals
///   P-int = integral_1^inf W x^(g-1) dx,
///   Q-int = 2 integral_1^inf W (x^g - 1)/g x^(g-1) dx.
/// Between grid points W is replaced by its conditional mean given the
/// grid values (linear in 1/x, since W(C_{t,1/y}) is a Wiener process in
/// y); beyond the last point by W(x_max) x_max / x.
struct FunctionalWeights {
  double gamma_minus = 0.0;
  std::vector<double> p;
  std::vector<double> q;

  static FunctionalWeights build(std::span<const double> xgrid, double gamma_minus);
};

struct LimitFunctionals {
  std::vector<double> P;
  std::vector<double> Q;
  std::vector<double> Gamma;
  std::vector<double> U;
  std::vector<double> A;
};

/// Throws std::invalid_argument if gamma_minus > 0 anywhere or the
/// x-grid does not start at 1.
LimitFunctionals limit_functionals(const FieldDraw& draw, std::span<const double> xgrid,
                                   const LimitParams& params);
/// Same, with weights prebuilt per grid time.
LimitFunctionals limit_functionals(const FieldDraw& draw,
                                   std::span<const FunctionalWeights> weights,
                                   const LimitParams& params);

/// Limit (co)variances when gamma_minus == 0 and gamma_plus == gamma.
struct LimitVariances {
  double var_gamma_P;  // Var[gamma P] = gamma^2
  double var_Gamma;    // 1 + gamma^2
  double var_U;        // 1
  double var_A;        // 2 + gamma^2
  double cov_P_U;      // 0
  double cov_Q_U;      // 0
  double var_P;        // 1
  double var_Q;        // 20
  double cov_P_Q;      // 4
};

LimitVariances limit_variances_gm0(double gamma);

struct RateRow {
  std::size_t n;
  std::size_t k;
  double sqrt_k_A;     // sqrt(k) sup_t |A_t(n/k)|
  double sqrt_k_bias;  // sqrt(k) sup_t |a_t(n/k)/U_t(n/k) - gamma+(t)|
};

struct SecondOrderReport {
  /// max over (t, v, x) of |second-order ratio - H|, and per v.
  double max_deviation = 0.0;
  std::vector<double> deviation_by_v;
  /// Pareto-GBM: v >= U_t(v) >= v - v^-M.
  std::size_t bracket_checks = 0;
  std::size_t bracket_violations = 0;
  /// Pareto-GBM: log U(vx) - log U(v) - log x <= 2 v^-(M+1) and
  /// >= -2 (vx)^-(M+1).
  std::size_t log_bound_checks = 0;
  std::size_t log_bound_violations = 0;
  std::vector<RateRow> rates;
  bool rates_decay = true;
};

SecondOrderReport second_order_check(const TrueFunctions& truth, const TimeGrid& grid,
                                     std::span<const double> v_grid,
                                     std::span<const double> x_grid,
                                     std::span<const std::pair<std::size_t, std::size_t>> schedule);

}  // namespace funcevt

#endif  // FUNCEVT_LIMIT_THEORY_HPP
