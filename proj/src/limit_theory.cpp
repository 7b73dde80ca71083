#include "funcevt/limit_theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

namespace funcevt {

namespace {

// integral_0^L s^j e^(a s) ds, j <= 3.
double exp_moment(double a, double L, int j) {
  const double aL = a * L;
  if (std::abs(aL) <= 2.0) {
    // sum_m a^m L^(m+j+1) / (m! (m+j+1))
    double term = std::pow(L, j + 1);  // a^m L^(m+j+1) / m! at m = 0
    double sum = term / (j + 1);
    for (int m = 1; m < 80; ++m) {
      term *= aL / m;
      const double add = term / (m + j + 1);
      sum += add;
      if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  const double e = std::exp(aL);
  switch (j) {
    case 0: return std::expm1(aL) / a;
    case 1: return (e * (aL - 1.0) + 1.0) / (a * a);
    case 2: return e * (L * L / a - 2.0 * L / (a * a) + 2.0 / (a * a * a)) - 2.0 / (a * a * a);
    default: {
      const double a2 = a * a, a3 = a2 * a, a4 = a3 * a;
      return e * (L * L * L / a - 3.0 * L * L / a2 + 6.0 * L / a3 - 6.0 / a4) + 6.0 / a4;
    }
  }
}

}  // namespace

double box_cox(double a, double x) {
  const double L = std::log(x);
  return a == 0.0 ? L : std::expm1(a * L) / a;
}

double H_func(double gamma_minus, double rho, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("H_func: x must be positive");
  if (rho == kRhoMinusInfinity) return 0.0;
  const double L = std::log(x);
  // With y = e^s: H = integral_0^L e^(g s) (e^(rho s) - 1)/rho ds
  //               = (m0(g + rho) - m0(g)) / rho, m_j(a) = integral_0^L s^j e^(a s) ds.
  if (std::abs(rho * L) < 1e-3) {
    return exp_moment(gamma_minus, L, 1) + 0.5 * rho * exp_moment(gamma_minus, L, 2) +
           rho * rho / 6.0 * exp_moment(gamma_minus, L, 3);
  }
  return (exp_moment(gamma_minus + rho, L, 0) - exp_moment(gamma_minus, L, 0)) / rho;
}

LimitParams LimitParams::constant(const TimeGrid& grid, double gamma, double rho) {
  LimitParams p;
  p.grid = grid;
  p.gamma_plus.assign(grid.size(), std::max(gamma, 0.0));
  p.gamma_minus.assign(grid.size(), std::min(gamma, 0.0));
  p.rho.assign(grid.size(), rho);
  return p;
}

void LimitParams::validate() const {
  const std::size_t m = grid.size();
  if (gamma_plus.size() != m || gamma_minus.size() != m || rho.size() != m) {
    throw std::invalid_argument("LimitParams: curve sizes must match the grid");
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (gamma_plus[j] < 0.0) throw std::invalid_argument("LimitParams: gamma_plus must be >= 0");
    if (gamma_minus[j] > 0.0) throw std::invalid_argument("LimitParams: gamma_minus must be <= 0");
    if (rho[j] > 0.0) throw std::invalid_argument("LimitParams: rho must be <= 0");
  }
}

namespace {

// log E min(B, c) with B = exp(sigma Z - sigma^2/2).
double log_lognormal_min(double sigma, double c) {
  const double d1 = (-std::log(c) + 0.5 * sigma * sigma) / sigma;
  const double d2 = d1 - sigma;
  if (c >= 1.0) {
    const double call = normal_cdf(d1) - c * normal_cdf(d2);
    return std::log1p(-std::max(call, 0.0));
  }
  return std::log(normal_cdf(-d1) + c * normal_cdf(d2));
}

}  // namespace

double TrueFunctions::log_excess(double t, double v) const {
  if (!(v > 1.0)) throw std::invalid_argument("U_t(v) requires v > 1");
  if (family == Family::moving_max) return -std::log(-v * std::log1p(-1.0 / v));
  if (t == 0.0) return 0.0;
  // U = v e^r solves P{xi(t) > U} = 1/v, i.e. E min(B(t), v e^r) = e^r.
  const double sigma = std::sqrt(t);
  const auto g = [&](double r) { return log_lognormal_min(sigma, v * std::exp(r)) - r; };
  const double g0 = g(0.0);
  if (g0 >= 0.0) return 0.0;
  double lo = 2.0 * g0;
  int expand = 0;
  while (g(lo) <= 0.0) {
    lo *= 2.0;
    if (++expand > 200) throw std::runtime_error("U_t(v): cannot bracket the quantile");
  }
  std::uintmax_t max_iter = 300;
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, lo, 0.0, boost::math::tools::eps_tolerance<double>(52), max_iter);
  if (max_iter >= 300) throw std::runtime_error("U_t(v): root finder did not converge");
  return 0.5 * (a + b);
}

double TrueFunctions::U(double t, double v) const { return v * std::exp(log_excess(t, v)); }

double TrueFunctions::a_over_U(double, double v) const {
  return family == Family::moving_max ? 1.0 + 0.5 / v : 1.0;
}

double TrueFunctions::a(double t, double v) const { return U(t, v) * a_over_U(t, v); }

double TrueFunctions::A(double, double v) const {
  return family == Family::moving_max ? -0.5 / v : std::pow(v, -bound_exponent);
}

LimitParams TrueFunctions::params(const TimeGrid& grid) const {
  return LimitParams::constant(grid, 1.0, rho(0.0));
}

TrueFunctions true_functions(Family family, double bound_exponent) {
  if (!(bound_exponent > 0.0)) throw std::invalid_argument("true_functions: M must be positive");
  return TrueFunctions{family, bound_exponent};
}

LimitField::LimitField(const MeasureOracle& oracle, TimeGrid tgrid, std::vector<double> xgrid,
                       double clip_tolerance)
    : tgrid_(std::move(tgrid)), xgrid_(std::move(xgrid)) {
  if (xgrid_.empty()) throw std::invalid_argument("LimitField: empty x-grid");
  const auto nx = static_cast<Eigen::Index>(xgrid_.size());
  const auto cells = static_cast<Eigen::Index>(tgrid_.size()) * nx;
  covariance_.resize(cells, cells);

  // The moving-max measure is stationary, symmetric in the time shift
  // and homogeneous, so nu(C_{t,x} ∩ C_{s,y}) = nu(C_{0,1} ∩ C_{|t-s|,y/x}) / x.
  std::map<std::pair<long long, long long>, double> memo;
  const auto intersection = [&](double t, double x, double s, double y) {
    if (oracle.family != Family::moving_max || t == s) return nu_intersection(oracle, t, x, s, y);
    const double h = std::abs(t - s);
    const double ratio = y / x;
    const std::pair<long long, long long> key{std::llround(h * 1e12),
                                              std::llround(std::log(ratio) * 1e12)};
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, nu_intersection(oracle, 0.0, 1.0, h, ratio)).first;
    return it->second / x;
  };

  for (Eigen::Index a = 0; a < cells; ++a) {
    const double ta = tgrid_[static_cast<std::size_t>(a / nx)];
    const double xa = xgrid_[static_cast<std::size_t>(a % nx)];
    for (Eigen::Index b = a; b < cells; ++b) {
      const double tb = tgrid_[static_cast<std::size_t>(b / nx)];
      const double xb = xgrid_[static_cast<std::size_t>(b % nx)];
      const double c = intersection(ta, xa, tb, xb);
      covariance_(a, b) = c;
      covariance_(b, a) = c;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance_);
  if (solver.info() != Eigen::Success) throw CovarianceError("LimitField: eigen-decomposition failed");
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (roots(i) < -clip_tolerance) {
      throw CovarianceError("LimitField: covariance eigenvalue " + format_double(roots(i)) +
                            " below tolerance; the oracle is inconsistent");
    }
    if (roots(i) < 0.0) {
      roots(i) = 0.0;
      ++clipped_;
    }
    roots(i) = std::sqrt(roots(i));
  }
  factor_ = solver.eigenvectors() * roots.asDiagonal();
}

FieldDraw LimitField::sample(Engine& rng) const {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Eigen::VectorXd w = factor_ * z;
  const std::size_t nx = xgrid_.size();
  FieldDraw draw{Matrix(tgrid_.size(), nx)};
  for (std::size_t j = 0; j < tgrid_.size(); ++j) {
    for (std::size_t i = 0; i < nx; ++i) draw.values(j, i) = w(static_cast<Eigen::Index>(j * nx + i));
  }
  return draw;
}

std::vector<FieldDraw> simulate_limit_field(const MeasureOracle& oracle, const TimeGrid& tgrid,
                                            const std::vector<double>& xgrid, std::size_t draws,
                                            std::uint64_t seed) {
  const LimitField field(oracle, tgrid, xgrid);
  std::vector<FieldDraw> out;
  out.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    Engine rng(split_seed(seed, d));
    out.push_back(field.sample(rng));
  }
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("geometric_grid: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> functional_xgrid(double x_max, std::size_t count) {
  return geometric_grid(1.0, x_max, count);
}

FunctionalWeights FunctionalWeights::build(std::span<const double> xgrid, double gamma_minus) {
  if (gamma_minus > 0.0) throw std::invalid_argument("limit functionals: gamma_minus must be <= 0");
  if (xgrid.size() < 2 || xgrid.front() != 1.0) {
    throw std::invalid_argument("limit functionals: x-grid must start at 1 and have >= 2 points");
  }
  const double g = gamma_minus;
  const std::size_t n = xgrid.size();
  FunctionalWeights w;
  w.gamma_minus = g;
  w.p.assign(n, 0.0);
  w.q.assign(n, 0.0);
  static const QuadratureRule gl = gauss_legendre_rule(8);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(xgrid[i + 1] > xgrid[i])) throw std::invalid_argument("limit functionals: x-grid not increasing");
    const double u0 = std::log(xgrid[i]);
    const double u1 = std::log(xgrid[i + 1]);
    const double s_hi = 1.0 / xgrid[i];
    const double s_lo = 1.0 / xgrid[i + 1];
    const double half = 0.5 * (u1 - u0);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double u = u0 + half * (gl.nodes[q] + 1.0);
      const double x = std::exp(u);
      const double lam = (1.0 / x - s_lo) / (s_hi - s_lo);  // weight on the left node
      const double kp = std::pow(x, g) * half * gl.weights[q];  // x^(g-1) dx with dx = x du
      const double kq = 2.0 * box_cox(g, x) * kp;
      w.p[i] += lam * kp;
      w.p[i + 1] += (1.0 - lam) * kp;
      w.q[i] += lam * kq;
      w.q[i + 1] += (1.0 - lam) * kq;
    }
  }
  // Tail: W(x) ~ W(x_max) x_max / x for x > x_max.
  const double xm = xgrid.back();
  w.p.back() += std::pow(xm, g) / (1.0 - g);
  // x_max * integral_{x_max}^inf 2 (x^g - 1)/g x^(g-2) dx in closed form.
  w.q.back() += 2.0 * std::pow(xm, g) * (box_cox(g, xm) + 1.0 / (1.0 - g)) / (1.0 - 2.0 * g);
  return w;
}

LimitFunctionals limit_functionals(const FieldDraw& draw, std::span<const double> xgrid,
                                   const LimitParams& params) {
  std::vector<FunctionalWeights> weights;
  for (std::size_t j = 0; j < params.grid.size(); ++j) {
    weights.push_back(FunctionalWeights::build(xgrid, params.gamma_minus[j]));
  }
  return limit_functionals(draw, weights, params);
}

LimitFunctionals limit_functionals(const FieldDraw& draw,
                                   std::span<const FunctionalWeights> weights,
                                   const LimitParams& params) {
  params.validate();
  const std::size_t m = params.grid.size();
  if (draw.values.rows() != m || weights.size() != m) {
    throw std::invalid_argument("limit functionals: draw, weights and params disagree on the t-grid");
  }
  LimitFunctionals out;
  out.P.resize(m);
  out.Q.resize(m);
  out.Gamma.resize(m);
  out.U.resize(m);
  out.A.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const FunctionalWeights& w = weights[j];
    if (w.p.size() != draw.values.cols()) {
      throw std::invalid_argument("limit functionals: weights do not match the x-grid");
    }
    const double g = params.gamma_minus[j];
    if (w.gamma_minus != g) throw std::invalid_argument("limit functionals: weights built for another gamma_minus");
    const double gp = params.gamma_plus[j];
    const double w1 = draw.values(j, 0);
    double ip = 0.0;
    double iq = 0.0;
    for (std::size_t i = 0; i < w.p.size(); ++i) {
      ip += w.p[i] * draw.values(j, i);
      iq += w.q[i] * draw.values(j, i);
    }
    const double a = 1.0 - g;
    const double b = 1.0 - 2.0 * g;
    const double P = ip - w1 / a;
    const double Q = iq - 2.0 / (a * b) * w1;
    out.P[j] = P;
    out.Q[j] = Q;
    out.Gamma[j] = (gp - 2.0 * a * a * b) * P + 0.5 * a * a * b * b * Q;
    out.U[j] = w1;
    out.A[j] = (gp + g) * w1 + (3.0 - 4.0 * g) * a * P - 0.5 * a * b * b * Q;
  }
  return out;
}

LimitVariances limit_variances_gm0(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("limit_variances_gm0: gamma must be positive");
  LimitVariances v{};
  v.var_gamma_P = gamma * gamma;
  v.var_Gamma = 1.0 + gamma * gamma;
  v.var_U = 1.0;
  v.var_A = 2.0 + gamma * gamma;
  v.cov_P_U = 0.0;
  v.cov_Q_U = 0.0;
  v.var_P = 1.0;
  v.var_Q = 20.0;
  v.cov_P_Q = 4.0;
  return v;
}

SecondOrderReport second_order_check(const TrueFunctions& truth, const TimeGrid& grid,
                                     std::span<const double> v_grid,
                                     std::span<const double> x_grid,
                                     std::span<const std::pair<std::size_t, std::size_t>> schedule) {
  SecondOrderReport rep;
  const double M = truth.bound_exponent;
  for (double v : v_grid) {
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double t = grid[j];
      const double gm = truth.gamma_minus(t);
      const double rv = truth.log_excess(t, v);
      if (truth.family == Family::pareto_gbm) {
        ++rep.bracket_checks;
        const double u = v * std::exp(rv);
        if (!(u <= v && u >= v - std::pow(v, -M))) ++rep.bracket_violations;
      }
      for (double x : x_grid) {
        // log U(vx) - log U(v) - log x without cancellation.
        const double excess = truth.log_excess(t, v * x) - rv;
        const double ratio = truth.a_over_U(t, v);
        const double lhs = ((std::log(x) + excess) / ratio - box_cox(gm, x)) / truth.A(t, v);
        worst = std::max(worst, std::abs(lhs - H_func(gm, truth.rho(t), x)));
        if (truth.family == Family::pareto_gbm) {
          rep.log_bound_checks += 2;
          if (excess > 2.0 * std::pow(v, -(M + 1.0))) ++rep.log_bound_violations;
          if (-excess > 2.0 * std::pow(v * x, -(M + 1.0))) ++rep.log_bound_violations;
        }
      }
    }
    rep.deviation_by_v.push_back(worst);
    rep.max_deviation = std::max(rep.max_deviation, worst);
  }
  for (const auto& [n, k] : schedule) {
    if (k < 1 || k >= n) throw std::invalid_argument("second_order_check: schedule needs 1 <= k < n");
    const double v = static_cast<double>(n) / static_cast<double>(k);
    const double root_k = std::sqrt(static_cast<double>(k));
    RateRow row{n, k, 0.0, 0.0};
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double t = grid[j];
      row.sqrt_k_A = std::max(row.sqrt_k_A, root_k * std::abs(truth.A(t, v)));
      row.sqrt_k_bias =
          std::max(row.sqrt_k_bias, root_k * std::abs(truth.a_over_U(t, v) - truth.gamma_plus(t)));
    }
    if (!rep.rates.empty() && (row.sqrt_k_A > rep.rates.back().sqrt_k_A ||
                               row.sqrt_k_bias > rep.rates.back().sqrt_k_bias)) {
      rep.rates_decay = false;
    }
    rep.rates.push_back(row);
  }
  return rep;
}

}  // namespace funcevt
