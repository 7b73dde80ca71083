#include "funcevt/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace funcevt {

std::string_view to_string(KernelShape shape) {
  return shape == KernelShape::double_exponential ? "dexp" : "t";
}

KernelShape parse_kernel_shape(std::string_view name) {
  if (name == "dexp") return KernelShape::double_exponential;
  if (name == "t") return KernelShape::student_t;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "' (expected dexp|t)");
}

KernelSpec KernelSpec::double_exponential(double lambda) {
  KernelSpec k{KernelShape::double_exponential, lambda, 3.0};
  k.validate();
  return k;
}

KernelSpec KernelSpec::student_t(double df, double lambda) {
  KernelSpec k{KernelShape::student_t, lambda, df};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("kernel: lambda must be positive and finite");
  }
  if (shape == KernelShape::student_t && !(df > 0.0)) {
    throw std::invalid_argument("kernel: df must be positive");
  }
}

double KernelSpec::density(double u) const {
  if (shape == KernelShape::double_exponential) return 0.5 * lambda * std::exp(-lambda * std::abs(u));
  const double w = lambda * u;
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                          0.5 * std::log(df * M_PI);
  return lambda * std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(w * w / df));
}

double KernelSpec::tail_mass(double half_width) const {
  if (half_width <= 0.0) return 1.0;
  if (shape == KernelShape::double_exponential) return std::exp(-lambda * half_width);
  const boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, lambda * half_width));
}

double KernelSpec::tail_quantile(double mass) const {
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("kernel: tail mass must be in (0,1)");
  if (shape == KernelShape::double_exponential) return -std::log(mass) / lambda;
  const boost::math::students_t_distribution<double> dist(df);
  return boost::math::quantile(boost::math::complement(dist, 0.5 * mass)) / lambda;
}

double KernelSpec::sample_abs(Engine& rng) const {
  if (shape == KernelShape::double_exponential) {
    return std::exponential_distribution<double>(lambda)(rng);
  }
  return std::abs(std::student_t_distribution<double>(df)(rng)) / lambda;
}

double KernelSpec::log_lipschitz() const {
  if (shape == KernelShape::double_exponential) return lambda;
  return lambda * (df + 1.0) / (2.0 * std::sqrt(df));
}

double KernelSpec::oscillation_bound(double delta) const {
  return std::expm1(log_lipschitz() * std::abs(delta));
}

double KernelSpec::oscillation_constant(double delta0) const {
  if (!(delta0 > 0.0 && delta0 < 1.0)) {
    throw std::invalid_argument("oscillation_constant: delta0 must lie in (0,1)");
  }
  // h(delta) = (exp(L delta) - 1) (log 1/delta)^3 vanishes as delta -> 0
  // and is unimodal in log delta: coarse scan, then golden-section refine.
  const auto h = [this](double ld) { return oscillation_bound(std::exp(ld)) * std::pow(-ld, 3.0); };
  const double lo = std::log(1e-300);
  const double hi = std::log(delta0);
  constexpr int steps = 4000;
  int arg = 0;
  double best = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double v = h(lo + (hi - lo) * i / steps);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  double a = lo + (hi - lo) * std::max(arg - 1, 0) / steps;
  double b = lo + (hi - lo) * std::min(arg + 1, steps) / steps;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (h(c) > h(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  best = std::max({best, h(a), h(b)});
  return best * (1.0 + 1e-9);
}

}  // namespace funcevt
