#include "funcevt/exponent_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "funcevt/numerics.hpp"

namespace funcevt {

MeasureOracle MeasureOracle::moving_max(const KernelSpec& kernel, double tolerance) {
  kernel.validate();
  MeasureOracle o;
  o.family = Family::moving_max;
  o.kernel = kernel;
  o.tolerance = tolerance;
  return o;
}

MeasureOracle MeasureOracle::pareto_gbm(ExpectationMethod method, std::size_t hermite_nodes,
                                        std::size_t mc_draws, std::uint64_t seed) {
  MeasureOracle o;
  o.family = Family::pareto_gbm;
  o.method = method;
  o.hermite_nodes = hermite_nodes;
  o.mc_draws = mc_draws;
  o.seed = seed;
  return o;
}

namespace {

void check_level(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("exponent measure: levels must be positive");
}

// integral over R of max_j f(t_j + u) / x_j, split at the kernel modes
// and at every sign change of the pairwise log-ratios.
double integral_of_max(const MeasureOracle& o, std::span<const double> times,
                       std::span<const double> levels) {
  const KernelSpec& f = o.kernel;
  std::vector<double> breaks;
  for (double t : times) breaks.push_back(-t);
  const auto [lo_it, hi_it] = std::minmax_element(breaks.begin(), breaks.end());
  const double span = 60.0 / f.lambda;
  const double lo = *lo_it - span;
  const double hi = *hi_it + span;
  constexpr int scan = 4000;
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = a + 1; b < times.size(); ++b) {
      const auto diff = [&](double u) {
        return std::log(f.density(times[a] + u) / levels[a]) -
               std::log(f.density(times[b] + u) / levels[b]);
      };
      double u0 = lo;
      double d0 = diff(u0);
      for (int i = 1; i <= scan; ++i) {
        const double u1 = lo + (hi - lo) * i / scan;
        const double d1 = diff(u1);
        if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
          double l = u0, r = u1, dl = d0;
          for (int it = 0; it < 200 && r - l > 1e-15 * (1.0 + std::abs(l)); ++it) {
            const double mid = 0.5 * (l + r);
            const double dm = diff(mid);
            if ((dm < 0.0) == (dl < 0.0)) {
              l = mid;
              dl = dm;
            } else {
              r = mid;
            }
          }
          breaks.push_back(0.5 * (l + r));
        }
        u0 = u1;
        d0 = d1;
      }
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto integrand = [&](double u) {
    double best = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      best = std::max(best, f.density(times[j] + u) / levels[j]);
    }
    return best;
  };
  const double inf = std::numeric_limits<double>::infinity();
  try {
    double total = integrate(integrand, -inf, breaks.front(), o.tolerance, o.tolerance);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      total += integrate(integrand, breaks[i], breaks[i + 1], o.tolerance, o.tolerance);
    }
    total += integrate(integrand, breaks.back(), inf, o.tolerance, o.tolerance);
    return total;
  } catch (const QuadratureError& e) {
    throw OracleError(std::string("moving-max exponent measure: ") + e.what());
  }
}

// E min(R, K), R = exp(sigma Z - sigma^2/2).
double lognormal_min_closed(double sigma, double cap) {
  const double d1 = (-std::log(cap) + 0.5 * sigma * sigma) / sigma;
  const double d2 = d1 - sigma;
  return normal_cdf(-d1) + cap * normal_cdf(d2);
}

double gbm_intersection(const MeasureOracle& o, double t, double x, double s, double y) {
  // Order so that (ta, xa) is the earlier time.
  double ta = s, xa = y, tb = t, xb = x;
  if (t < s) {
    ta = t;
    xa = x;
    tb = s;
    xb = y;
  }
  const double sigma = std::sqrt(tb - ta);
  const double cap = xb / xa;
  switch (o.method) {
    case ExpectationMethod::closed_form:
      return lognormal_min_closed(sigma, cap) / xb;
    case ExpectationMethod::gauss_hermite: {
      const QuadratureRule rule = gauss_hermite_rule(o.hermite_nodes);
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * std::min(std::exp(sigma * rule.nodes[i] - 0.5 * sigma * sigma), cap);
      }
      return acc / xb;
    }
    case ExpectationMethod::monte_carlo: {
      Engine rng(o.seed);
      std::normal_distribution<double> normal;
      const double root_ta = std::sqrt(ta);
      double acc = 0.0;
      for (std::size_t i = 0; i < o.mc_draws; ++i) {
        const double ba = std::exp(root_ta * normal(rng) - 0.5 * ta);
        const double bb = ba * std::exp(sigma * normal(rng) - 0.5 * sigma * sigma);
        acc += std::min(ba / xa, bb / xb);
      }
      return acc / static_cast<double>(o.mc_draws);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double gbm_union_mc(const MeasureOracle& o, std::span<const double> times,
                    std::span<const double> levels) {
  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  Engine rng(o.seed);
  std::normal_distribution<double> normal;
  double acc = 0.0;
  for (std::size_t d = 0; d < o.mc_draws; ++d) {
    double w = 0.0;
    double prev = 0.0;
    double best = 0.0;
    for (std::size_t idx : order) {
      const double dt = times[idx] - prev;
      if (dt > 0.0) w += std::sqrt(dt) * normal(rng);
      prev = times[idx];
      best = std::max(best, std::exp(w - 0.5 * times[idx]) / levels[idx]);
    }
    acc += best;
  }
  return acc / static_cast<double>(o.mc_draws);
}

}  // namespace

double nu_rect(const MeasureOracle&, double, double x) {
  check_level(x);
  return 1.0 / x;
}

double nu_intersection(const MeasureOracle& oracle, double t, double x, double s, double y) {
  check_level(x);
  check_level(y);
  if (t == s) return std::min(1.0 / x, 1.0 / y);
  if (oracle.family == Family::pareto_gbm) return gbm_intersection(oracle, t, x, s, y);
  const double times[] = {t, s};
  const double levels[] = {x, y};
  return 1.0 / x + 1.0 / y - integral_of_max(oracle, times, levels);
}

double nu_union(const MeasureOracle& oracle, std::span<const double> times,
                std::span<const double> levels) {
  if (times.size() != levels.size() || times.empty()) {
    throw std::invalid_argument("nu_union: need matching non-empty times and levels");
  }
  for (double x : levels) check_level(x);
  if (times.size() == 1) return 1.0 / levels[0];
  if (oracle.family == Family::moving_max) return integral_of_max(oracle, times, levels);
  if (times.size() == 2 && oracle.method != ExpectationMethod::monte_carlo) {
    return 1.0 / levels[0] + 1.0 / levels[1] -
           nu_intersection(oracle, times[0], levels[0], times[1], levels[1]);
  }
  return gbm_union_mc(oracle, times, levels);
}

double d_metric(const MeasureOracle& oracle, double beta, Cell a, Cell b, double tolerance) {
  const double inter = nu_intersection(oracle, a.t, a.x, b.t, b.x);
  const double pa = std::pow(a.x, beta);
  const double pb = std::pow(b.x, beta);
  const double only_a = 1.0 / a.x - inter;
  const double only_b = 1.0 / b.x - inter;
  const double radicand = (pa - pb) * (pa - pb) * inter + pa * pa * only_a + pb * pb * only_b;
  if (radicand < -tolerance) {
    throw OracleError("d_metric: negative radicand " + format_double(radicand) +
                      " (inconsistent intersection mass)");
  }
  return std::sqrt(std::max(radicand, 0.0));
}

double homogeneity_check(const MeasureOracle& oracle, double r, std::span<const CellPair> pairs) {
  if (!(r > 0.0)) throw std::invalid_argument("homogeneity_check: r must be positive");
  MeasureOracle scaled = oracle;
  scaled.seed = split_seed(oracle.seed, 1);
  double worst = 0.0;
  for (const auto& p : pairs) {
    const double base = nu_intersection(oracle, p.a.t, p.a.x, p.b.t, p.b.x) / r;
    const double lhs = r == 1.0 ? base
                                : nu_intersection(scaled, p.a.t, r * p.a.x, p.b.t, r * p.b.x);
    worst = std::max(worst, std::abs(lhs - base) / std::abs(base));
  }
  return worst;
}

}  // namespace funcevt
