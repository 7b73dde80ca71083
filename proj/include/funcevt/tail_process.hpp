#ifndef FUNCEVT_TAIL_PROCESS_HPP
#define FUNCEVT_TAIL_PROCESS_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "funcevt/limit_theory.hpp"
#include "funcevt/path_model.hpp"

namespace funcevt {

/// S_{n,t}(x) = (1/n) #{i : zeta_i(t) >= x}.
double tail_counts(const ParetoPaths& paths, std::size_t t_index, double x);

/// w_n(t,x) = sqrt(k) ((n/k) S_{n,t}(x n/k) - 1/x).
double tail_empirical(const ParetoPaths& paths, std::size_t k, std::size_t t_index, double x);

/// w_n evaluated on a t-grid x x-grid; values(j, i) = w_n(t_j, x_i).
struct TailField {
  TimeGrid tgrid = make_grid(1);
  std::vector<double> xgrid;
  Matrix values;
  std::size_t n = 0;
  std::size_t k = 0;
  double beta = 0.25;
  double c = 1.0;
};

/// Geometric x-grid from c to n/k (above n/k, w_n is the deterministic
/// -sqrt(k)/x).
std::vector<double> tail_xgrid(std::size_t n, std::size_t k, double c, std::size_t count = 64);

/// Throws std::invalid_argument unless 0 <= beta < 1/2, c > 0, every
/// x >= c and 1 <= k <= n-1.
TailField tail_field(const ParetoPaths& paths, std::size_t k, double beta, double c,
                     std::vector<double> xgrid);

/// max over the shared grid of x^beta |w_n(t,x) - W(C_{t,x})|.
double weighted_sup_distance(const TailField& field, const LimitField& limit,
                             const FieldDraw& draw);
/// Same, against explicit limit values laid out like field.values.
double weighted_sup_distance(const TailField& field, const Matrix& limit_values);

/// sqrt(k) ((zeta_{n-k,n}(t) k/n)^alpha(t) - 1) at every grid point.
std::vector<double> quantile_stat(const ParetoPaths& paths, std::size_t k,
                                  std::span<const double> alpha);

enum class OscillationVariant { ratio, log };

struct OscillationConfig {
  double s = 0.0;
  double delta = 0.05;
  double v = 10.0;
  double K = 1.0;
  double beta = 0.25;
  double c1 = 1.0;
  OscillationVariant variant = OscillationVariant::ratio;

  void validate() const;
};

struct OscillationResult {
  double estimate = 0.0;    // violations / conditioning
  std::size_t conditioning = 0;
  std::size_t violations = 0;
  double threshold = 0.0;   // K (log 1/delta)^-3
  double bound = 0.0;       // c1 (log 1/delta)^(-(2+2 beta)/(1-2 beta))
};

/// No path exceeds v on the window, so the conditional probability is
/// undefined.
class InsufficientExceedances : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empirical P{zeta outside E_{s,delta} | sup_{[s,s+delta]} zeta >= v}.
/// Membership in E_{s,delta} is checked at the grid points inside
/// [s, s+delta], relative to the first of them.
OscillationResult oscillation_diagnostic(const ParetoPaths& paths, const OscillationConfig& cfg);

}  // namespace funcevt

#endif  // FUNCEVT_TAIL_PROCESS_HPP
