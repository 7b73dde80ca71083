#ifndef FUNCEVT_EXPONENT_MEASURE_HPP
#define FUNCEVT_EXPONENT_MEASURE_HPP

#include <cstdint>
#include <span>

#include "funcevt/kernel.hpp"
#include "funcevt/path_model.hpp"

namespace funcevt {

/// Evaluates the exponent measure nu of one of the two example families
/// on the sets C_{t,x} = {h : h(t) >= x} and their pairwise
/// intersections.
///
/// moving-max:  nu(union_j C_{t_j,x_j}) = integral max_j f(t_j+u)/x_j du,
///              by adaptive quadrature over the real line.
/// pareto-gbm:  nu(union_j C_{t_j,x_j}) = E max_j B(t_j)/x_j, and
///              nu(C_{t,x} ∩ C_{s,y}) = E min(B(t)/x, B(s)/y). With
///              s < t and R = B(t)/B(s) independent of B(s), the latter
///              is (1/x) E min(R, x/y): a lognormal partial expectation.
struct MeasureOracle {
  Family family = Family::moving_max;
  KernelSpec kernel;
  ExpectationMethod method = ExpectationMethod::closed_form;
  std::size_t hermite_nodes = 64;
  std::size_t mc_draws = 1'000'000;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;

  static MeasureOracle moving_max(const KernelSpec& kernel, double tolerance = 1e-10);
  static MeasureOracle pareto_gbm(ExpectationMethod method = ExpectationMethod::closed_form,
                                  std::size_t hermite_nodes = 64,
                                  std::size_t mc_draws = 1'000'000, std::uint64_t seed = 0);
};

/// Raised when an oracle evaluation fails (quadrature non-convergence,
/// inconsistent masses).
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// nu(C_{t,x}) = 1/x.
double nu_rect(const MeasureOracle& oracle, double t, double x);

/// nu(C_{t,x} ∩ C_{s,y}); equals min(1/x, 1/y) when t == s.
double nu_intersection(const MeasureOracle& oracle, double t, double x, double s, double y);

/// nu(union_j C_{t_j, x_j}). Pareto-GBM with more than two points uses
/// Monte Carlo with the oracle's draw count and seed.
double nu_union(const MeasureOracle& oracle, std::span<const double> times,
                std::span<const double> levels);

struct Cell {
  double t;
  double x;
};

/// d((t,x),(s,y)) = sqrt(E (x^beta W(C_{t,x}) - y^beta W(C_{s,y}))^2).
/// Throws OracleError if the radicand is below -tolerance.
double d_metric(const MeasureOracle& oracle, double beta, Cell a, Cell b,
                double tolerance = 1e-9);

struct CellPair {
  Cell a;
  Cell b;
};

/// max over pairs of |nu(C_{t,rx} ∩ C_{s,ry}) - nu(C_{t,x} ∩ C_{s,y})/r|
/// relative to the right-hand side. Monte Carlo oracles evaluate the
/// scaled side with an independent seed.
double homogeneity_check(const MeasureOracle& oracle, double r, std::span<const CellPair> pairs);

}  // namespace funcevt

#endif  // FUNCEVT_EXPONENT_MEASURE_HPP
