#ifndef FUNCEVT_KERNEL_HPP
#define FUNCEVT_KERNEL_HPP

#include <string_view>

#include "funcevt/numerics.hpp"

namespace funcevt {

enum class KernelShape { double_exponential, student_t };

std::string_view to_string(KernelShape shape);
KernelShape parse_kernel_shape(std::string_view name);  // "dexp" | "t"

/// Symmetric unimodal density f used by the moving-maxima process.
///
/// double_exponential: f(u) = (lambda/2) exp(-lambda |u|).
/// student_t:          f(u) = lambda * t_df(lambda u).
///
/// Both shapes have a Lipschitz log-density, so
/// sup_{|t-s|<=delta} |f(t) - f(s)| / f(s) <= exp(L delta) - 1, which is
/// eventually below K (log 1/delta)^-3.
struct KernelSpec {
  KernelShape shape = KernelShape::double_exponential;
  double lambda = 1.0;
  double df = 3.0;

  static KernelSpec double_exponential(double lambda = 1.0);
  static KernelSpec student_t(double df = 3.0, double lambda = 1.0);

  /// Throws std::invalid_argument on lambda <= 0 or df <= 0.
  void validate() const;

  double density(double u) const;
  double peak() const { return density(0.0); }

  /// P{|U| > L} for U with density f.
  double tail_mass(double half_width) const;
  /// Smallest L with tail_mass(L) <= mass.
  double tail_quantile(double mass) const;
  /// Draws |U|.
  double sample_abs(Engine& rng) const;

  /// sup_u |d/du log f(u)|.
  double log_lipschitz() const;
  /// Upper bound on sup_{|t-s|<=delta} |f(t) - f(s)| / f(s).
  double oscillation_bound(double delta) const;
  /// K with oscillation_bound(delta) <= K (log 1/delta)^-3 for all
  /// delta in (0, delta0]; requires delta0 < 1.
  double oscillation_constant(double delta0) const;
};

}  // namespace funcevt

#endif  // FUNCEVT_KERNEL_HPP
