#ifndef FUNCEVT_PROCESS_SIM_HPP
#define FUNCEVT_PROCESS_SIM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "funcevt/kernel.hpp"
#include "funcevt/path_model.hpp"

namespace funcevt {

struct SimConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  /// Poisson window half-width L for the moving-maxima family; points
  /// are drawn with X in [-1 - L, L]. Zero selects required_window().
  double window = 0.0;
  double eps_trunc = 1e-6;

  void validate() const;
};

/// Smallest L such that, with probability >= 1 - eps, no Poisson point
/// outside the window contributes more than eps to sup_t xi(t).
///
/// The expected number of excluded points with sup_t f(t+X)/Y > eps is
/// P{|U| > L} / eps, so L is the kernel's two-sided eps^2 tail quantile.
double required_window(const KernelSpec& kernel, double eps_trunc);

struct PoissonPoint {
  double x;
  double y;
};

/// xi(t_j) = max_j f(t_j + X_j) / Y_j over an explicit point set.
std::vector<double> moving_max_path(const KernelSpec& kernel, const TimeGrid& grid,
                                    std::span<const PoissonPoint> points);

/// n i.i.d. moving-maxima paths xi(t) = sup_j f(t + X_j) / Y_j.
///
/// Points are generated as ordered arrivals V_1 < V_2 < ... of a Poisson
/// process of rate G = integral of g, with g(X) = sup_{t in [0,1]} f(t+X)
/// = f(dist(X, [-1,0])), X drawn from g / G, and Y = V g(X). Since
/// f(t+X)/Y <= 1/V, generation stops once 1/V falls below min_t xi(t).
/// Throws std::invalid_argument when cfg.window is set below
/// required_window(kernel, cfg.eps_trunc).
PathSample simulate_moving_max(const KernelSpec& kernel, const TimeGrid& grid,
                               const SimConfig& cfg);

/// n i.i.d. paths xi(t) = Y exp(W(t) - t/2): Y standard Pareto, W a
/// Wiener process sampled with exact Gaussian increments on the grid.
PathSample simulate_pareto_gbm(const TimeGrid& grid, const SimConfig& cfg);

PathSample simulate(Family family, const KernelSpec& kernel, const TimeGrid& grid,
                    const SimConfig& cfg);

struct MaxCheckReport {
  double empirical = 0.0;  // frequency of {max_i xi_i(t_j)/n <= x_j for all j}
  double limit = 0.0;      // exp(-nu(union of C_{t_j, x_j}))
  double deviation = 0.0;  // |empirical - limit|
  double std_error = 0.0;  // binomial standard error of the frequency
  std::size_t reps = 0;
};

/// Empirical check of the domain-of-attraction limit: simulates reps
/// samples of size n and compares the frequency of the joint event with
/// its max-stable limit. Times must be strictly increasing points in
/// [0,1]; levels positive.
MaxCheckReport empirical_max_check(Family family, const KernelSpec& kernel,
                                   std::span<const double> times,
                                   std::span<const double> levels, std::size_t n,
                                   std::size_t reps, std::uint64_t seed);

}  // namespace funcevt

#endif  // FUNCEVT_PROCESS_SIM_HPP
