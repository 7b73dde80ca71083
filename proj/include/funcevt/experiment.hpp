#ifndef FUNCEVT_EXPERIMENT_HPP
#define FUNCEVT_EXPERIMENT_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "funcevt/estimators.hpp"
#include "funcevt/kernel.hpp"
#include "funcevt/limit_theory.hpp"
#include "funcevt/path_model.hpp"
#include "funcevt/tail_process.hpp"

namespace funcevt {

enum class ExperimentKind { consistency, normality, tailcov, quantile, oscillation };
enum class Statistic { hill, moment, location, scale };
enum class OutputFormat { csv, json };

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(Statistic stat);
std::string_view to_string(OutputFormat format);
ExperimentKind parse_kind(std::string_view name);
Statistic parse_statistic(std::string_view name);
OutputFormat parse_format(std::string_view name);

inline constexpr std::array<Statistic, 4> kAllStatistics = {
    Statistic::hill, Statistic::moment, Statistic::location, Statistic::scale};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::normality;
  Family family = Family::pareto_gbm;
  KernelSpec kernel;
  double bound_exponent = 1.5;
  std::size_t n = 10000;
  std::size_t k = 100;
  /// (n, k) pairs; empty means the single pair (n, k).
  std::vector<std::pair<std::size_t, std::size_t>> schedule;
  std::size_t m = 11;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  double beta = 0.25;
  double c = 1.0;
  /// Standardized statistic reported per t (consistency, normality).
  Statistic statistic = Statistic::hill;
  /// Pre-registered times at which the KS test is judged.
  std::vector<double> ks_times = {0.0, 0.5, 1.0};
  double ks_alpha = 0.01;
  /// Relative band around the limit variance used by --check.
  double tolerance = 0.25;
  double window = 0.0;
  double eps_trunc = 1e-6;
  OscillationConfig oscillation;
  std::string output;
  OutputFormat format = OutputFormat::csv;

  /// The schedule with the single-pair default applied.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
  /// Throws std::invalid_argument on k >= n, a schedule whose k is not
  /// nondecreasing or whose k/n is not decreasing, or bad sizes.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON echo, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// One replication: estimator curves per schedule entry (consistency,
/// normality) or tail statistics per grid point (tailcov, quantile), or
/// the oscillation counts {conditioning, violations}.
struct Replication {
  std::uint64_t id = 0;
  std::uint64_t seed = 0;
  std::vector<EstimatorCurves> curves;
  std::vector<double> values;
  bool flagged = false;
};

struct ReplicationSet {
  ExperimentConfig config;
  std::vector<Replication> reps;  // sorted by id

  std::size_t flagged() const;
};

/// Worker count from FUNCEVT_WORKERS, else hardware concurrency.
std::size_t default_workers();

/// Replication r uses seed split_seed(cfg.seed, r); schedule entry e
/// inside it uses split_seed(that, e). The result does not depend on
/// the number of workers.
ReplicationSet run_replications(const ExperimentConfig& cfg, std::size_t workers = 1);

/// sqrt(k)-standardized errors at one schedule entry over the unflagged
/// replications; rows are replications, columns grid points.
struct StandardizedErrors {
  TimeGrid grid = make_grid(1);
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::uint64_t> ids;
  std::array<Matrix, 4> scaled;  // indexed by Statistic

  const Matrix& at(Statistic s) const { return scaled[static_cast<std::size_t>(s)]; }
};

/// sqrt(k)(g+ - g+), sqrt(k)(g - g), sqrt(k)(U^ - U)/a, sqrt(k)(a^/a - 1)
/// with U, a evaluated at n/k. One entry per schedule pair.
std::vector<StandardizedErrors> standardize(const ReplicationSet& set, const TrueFunctions& truth,
                                            const LimitParams& params);

/// Limit variance of a standardized statistic when gamma_minus = 0.
double limit_variance(Statistic stat, double gamma);

struct StatsRow {
  double t = 0.0;
  double mean = 0.0;
  double var = 0.0;
  double var_limit = 0.0;
  double ks = 0.0;
  double ks_pvalue = 0.0;

  bool operator==(const StatsRow&) const = default;
};

/// Quantiles of sup_t |error| (unscaled) for one statistic and (n, k).
struct SupErrorRow {
  std::size_t n = 0;
  std::size_t k = 0;
  Statistic statistic = Statistic::hill;
  double median = 0.0;
  double q90 = 0.0;

  bool operator==(const SupErrorRow&) const = default;
};

/// Empirical covariance of w_n(t,1), w_n(s,1) with its oracle value.
struct CovarianceRow {
  double t = 0.0;
  double s = 0.0;
  double empirical = 0.0;
  double oracle = 0.0;

  bool operator==(const CovarianceRow&) const = default;
};

struct StatsReport {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::size_t reps = 0;
  std::size_t used = 0;
  std::size_t flagged = 0;
  std::vector<StatsRow> rows;
  std::vector<SupErrorRow> sup_errors;
  std::vector<CovarianceRow> covariances;
  std::optional<OscillationResult> oscillation;

  bool operator==(const StatsReport& other) const;
};

/// Per-t moments and KS against the fixed N(0, var_limit).
std::vector<StatsRow> summarize_columns(const TimeGrid& grid, const Matrix& values,
                                        std::span<const double> var_limit);

/// Full report for a replication set.
StatsReport summarize(const ReplicationSet& set);

void write_report_csv(std::ostream& out, const StatsReport& report);
std::vector<StatsRow> read_report_csv(std::istream& in);
nlohmann::json report_to_json(const StatsReport& report);
StatsReport report_from_json(const nlohmann::json& j);

/// Writes to path in the given format; std::runtime_error names the path
/// on failure.
void export_report(const StatsReport& report, const std::string& path, OutputFormat format);
StatsReport import_report_json(const std::string& path);

/// Acceptance thresholds for the configured kind; one message per failure.
std::vector<std::string> check_report(const StatsReport& report, const ExperimentConfig& cfg);

}  // namespace funcevt

#endif  // FUNCEVT_EXPERIMENT_HPP
