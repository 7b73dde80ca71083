#include "funcevt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "funcevt/exponent_measure.hpp"
#include "funcevt/numerics.hpp"
#include "funcevt/process_sim.hpp"

namespace funcevt {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view name, const std::array<E, N>& values, const char* what) {
  for (E v : values) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

constexpr std::array<ExperimentKind, 5> kKinds = {
    ExperimentKind::consistency, ExperimentKind::normality, ExperimentKind::tailcov,
    ExperimentKind::quantile, ExperimentKind::oscillation};

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::consistency: return "consistency";
    case ExperimentKind::normality: return "normality";
    case ExperimentKind::tailcov: return "tailcov";
    case ExperimentKind::quantile: return "quantile";
    case ExperimentKind::oscillation: return "oscillation";
  }
  return "?";
}

std::string_view to_string(Statistic stat) {
  switch (stat) {
    case Statistic::hill: return "hill";
    case Statistic::moment: return "moment";
    case Statistic::location: return "location";
    case Statistic::scale: return "scale";
  }
  return "?";
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json";
}

ExperimentKind parse_kind(std::string_view name) { return parse_enum(name, kKinds, "experiment kind"); }

Statistic parse_statistic(std::string_view name) { return parse_enum(name, kAllStatistics, "statistic"); }

OutputFormat parse_format(std::string_view name) {
  return parse_enum(name, std::array{OutputFormat::csv, OutputFormat::json}, "format");
}

std::vector<std::pair<std::size_t, std::size_t>> ExperimentConfig::pairs() const {
  if (schedule.empty()) return {{n, k}};
  return schedule;
}

void ExperimentConfig::validate() const {
  const auto p = pairs();
  for (const auto& [nn, kk] : p) {
    if (kk < 1 || kk >= nn) {
      throw std::invalid_argument("config: need 1 <= k < n, got n=" + std::to_string(nn) +
                                  " k=" + std::to_string(kk));
    }
  }
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i].first <= p[i - 1].first) throw std::invalid_argument("config: schedule n must increase");
    if (p[i].second < p[i - 1].second) throw std::invalid_argument("config: schedule k must be nondecreasing");
    const double prev = static_cast<double>(p[i - 1].second) / static_cast<double>(p[i - 1].first);
    const double cur = static_cast<double>(p[i].second) / static_cast<double>(p[i].first);
    if (!(cur < prev)) throw std::invalid_argument("config: schedule k/n must decrease");
  }
  if (m < 1) throw std::invalid_argument("config: m must be >= 1");
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (!(beta >= 0.0 && beta < 0.5)) throw std::invalid_argument("config: beta must lie in [0, 1/2)");
  if (!(c > 0.0)) throw std::invalid_argument("config: c must be positive");
  if (!(ks_alpha > 0.0 && ks_alpha < 1.0)) throw std::invalid_argument("config: ks_alpha must lie in (0,1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("config: tolerance must be positive");
  kernel.validate();
  if (kind == ExperimentKind::oscillation) oscillation.validate();
  if (kind == ExperimentKind::tailcov && m < 2) {
    throw std::invalid_argument("config: tailcov needs m >= 2");
  }
}

json to_json(const ExperimentConfig& cfg) {
  json sched = json::array();
  for (const auto& [nn, kk] : cfg.schedule) sched.push_back({nn, kk});
  return json{
      {"kind", to_string(cfg.kind)},
      {"family", to_string(cfg.family)},
      {"kernel", {{"shape", to_string(cfg.kernel.shape)}, {"lambda", cfg.kernel.lambda}, {"df", cfg.kernel.df}}},
      {"bound_exponent", cfg.bound_exponent},
      {"n", cfg.n},
      {"k", cfg.k},
      {"schedule", sched},
      {"m", cfg.m},
      {"reps", cfg.reps},
      {"seed", cfg.seed},
      {"beta", cfg.beta},
      {"c", cfg.c},
      {"statistic", to_string(cfg.statistic)},
      {"ks_times", cfg.ks_times},
      {"ks_alpha", cfg.ks_alpha},
      {"tolerance", cfg.tolerance},
      {"window", cfg.window},
      {"eps_trunc", cfg.eps_trunc},
      {"oscillation",
       {{"s", cfg.oscillation.s},
        {"delta", cfg.oscillation.delta},
        {"v", cfg.oscillation.v},
        {"K", cfg.oscillation.K},
        {"c1", cfg.oscillation.c1},
        {"variant", cfg.oscillation.variant == OscillationVariant::ratio ? "ratio" : "log"}}},
      {"output", cfg.output},
      {"format", to_string(cfg.format)},
  };
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw std::invalid_argument(std::string("config: unknown field '") + key + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  reject_unknown(j,
                 {"kind", "family", "kernel", "bound_exponent", "n", "k", "schedule", "m", "reps", "seed",
                  "beta", "c", "statistic", "ks_times", "ks_alpha", "tolerance", "window", "eps_trunc",
                  "oscillation", "output", "format"},
                 "config");
  ExperimentConfig cfg;
  try {
    if (j.contains("kind")) cfg.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("family")) cfg.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("kernel")) {
      const json& kj = j.at("kernel");
      reject_unknown(kj, {"shape", "lambda", "df"}, "kernel");
      if (kj.contains("shape")) cfg.kernel.shape = parse_kernel_shape(kj.at("shape").get<std::string>());
      read_field(kj, "lambda", cfg.kernel.lambda);
      read_field(kj, "df", cfg.kernel.df);
    }
    read_field(j, "bound_exponent", cfg.bound_exponent);
    read_field(j, "n", cfg.n);
    read_field(j, "k", cfg.k);
    if (j.contains("schedule")) {
      for (const auto& e : j.at("schedule")) {
        cfg.schedule.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
      }
    }
    read_field(j, "m", cfg.m);
    read_field(j, "reps", cfg.reps);
    read_field(j, "seed", cfg.seed);
    read_field(j, "beta", cfg.beta);
    read_field(j, "c", cfg.c);
    if (j.contains("statistic")) cfg.statistic = parse_statistic(j.at("statistic").get<std::string>());
    read_field(j, "ks_times", cfg.ks_times);
    read_field(j, "ks_alpha", cfg.ks_alpha);
    read_field(j, "tolerance", cfg.tolerance);
    read_field(j, "window", cfg.window);
    read_field(j, "eps_trunc", cfg.eps_trunc);
    if (j.contains("oscillation")) {
      const json& oj = j.at("oscillation");
      reject_unknown(oj, {"s", "delta", "v", "K", "c1", "variant"}, "oscillation");
      read_field(oj, "s", cfg.oscillation.s);
      read_field(oj, "delta", cfg.oscillation.delta);
      read_field(oj, "v", cfg.oscillation.v);
      read_field(oj, "K", cfg.oscillation.K);
      read_field(oj, "c1", cfg.oscillation.c1);
      if (oj.contains("variant")) {
        const auto v = oj.at("variant").get<std::string>();
        if (v == "ratio") {
          cfg.oscillation.variant = OscillationVariant::ratio;
        } else if (v == "log") {
          cfg.oscillation.variant = OscillationVariant::log;
        } else {
          throw std::invalid_argument("config: unknown oscillation variant '" + v + "'");
        }
      }
    }
    read_field(j, "output", cfg.output);
    if (j.contains("format")) cfg.format = parse_format(j.at("format").get<std::string>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.oscillation.beta = cfg.beta;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t ReplicationSet::flagged() const {
  return static_cast<std::size_t>(
      std::count_if(reps.begin(), reps.end(), [](const Replication& r) { return r.flagged; }));
}

std::size_t default_workers() {
  if (const char* env = std::getenv("FUNCEVT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace {

MarginalModel marginal_for(const ExperimentConfig& cfg) {
  MarginalModel model;
  model.family = cfg.family;
  model.bound_exponent = cfg.bound_exponent;
  return model;
}

PathSample simulate_entry(const ExperimentConfig& cfg, const TimeGrid& grid, std::size_t n,
                          std::uint64_t seed) {
  SimConfig sim;
  sim.n = n;
  sim.seed = seed;
  sim.window = cfg.window;
  sim.eps_trunc = cfg.eps_trunc;
  return simulate(cfg.family, cfg.kernel, grid, sim);
}

Replication run_one(const ExperimentConfig& cfg, const TimeGrid& grid, std::uint64_t id) {
  Replication rep;
  rep.id = id;
  rep.seed = split_seed(cfg.seed, id);
  const auto pairs = cfg.pairs();
  switch (cfg.kind) {
    case ExperimentKind::consistency:
    case ExperimentKind::normality:
      for (std::size_t e = 0; e < pairs.size(); ++e) {
        const PathSample sample = simulate_entry(cfg, grid, pairs[e].first, split_seed(rep.seed, e));
        rep.curves.push_back(estimate_curves(sample, pairs[e].second));
        if (rep.curves.back().flagged() > 0) rep.flagged = true;
      }
      break;
    case ExperimentKind::tailcov:
    case ExperimentKind::quantile: {
      const auto [n, k] = pairs.back();
      const ParetoPaths zeta =
          pareto_transform(simulate_entry(cfg, grid, n, split_seed(rep.seed, 0)), marginal_for(cfg));
      if (cfg.kind == ExperimentKind::tailcov) {
        for (std::size_t j = 0; j < grid.size(); ++j) rep.values.push_back(tail_empirical(zeta, k, j, 1.0));
      } else {
        const std::vector<double> alpha(grid.size(), 1.0);
        rep.values = quantile_stat(zeta, k, alpha);
      }
      break;
    }
    case ExperimentKind::oscillation: {
      const ParetoPaths zeta = pareto_transform(
          simulate_entry(cfg, grid, pairs.back().first, split_seed(rep.seed, 0)), marginal_for(cfg));
      try {
        const OscillationResult r = oscillation_diagnostic(zeta, cfg.oscillation);
        rep.values = {static_cast<double>(r.conditioning), static_cast<double>(r.violations)};
      } catch (const InsufficientExceedances&) {
        rep.values = {0.0, 0.0};
      }
      break;
    }
  }
  return rep;
}

}  // namespace

ReplicationSet run_replications(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  const TimeGrid grid = make_grid(cfg.m);
  ReplicationSet set;
  set.config = cfg;
  set.reps.resize(cfg.reps);
  workers = std::clamp<std::size_t>(workers, 1, cfg.reps);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (;;) {
      const std::size_t id = next.fetch_add(1);
      if (id >= cfg.reps) return;
      try {
        set.reps[id] = run_one(cfg, grid, id);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cfg.reps);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return set;
}

std::vector<StandardizedErrors> standardize(const ReplicationSet& set, const TrueFunctions& truth,
                                            const LimitParams& params) {
  const auto pairs = set.config.pairs();
  std::vector<StandardizedErrors> out;
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    StandardizedErrors se;
    se.n = pairs[e].first;
    se.k = pairs[e].second;
    std::vector<const EstimatorCurves*> used;
    for (const auto& rep : set.reps) {
      if (rep.curves.size() != pairs.size()) {
        throw std::invalid_argument("standardize: replication carries no estimator curves");
      }
      if (!rep.flagged) {
        used.push_back(&rep.curves[e]);
        se.ids.push_back(rep.id);
      }
    }
    if (used.empty()) {
      se.grid = params.grid;
    } else {
      se.grid = used.front()->grid;
    }
    if (se.grid.size() != params.grid.size()) {
      throw std::invalid_argument("standardize: parameter grid does not match the curves");
    }
    const std::size_t m = se.grid.size();
    for (auto& mat : se.scaled) mat = Matrix(used.size(), m);
    const double root_k = std::sqrt(static_cast<double>(se.k));
    const double v = static_cast<double>(se.n) / static_cast<double>(se.k);
    for (std::size_t j = 0; j < m; ++j) {
      const double t = se.grid[j];
      const double U = truth.U(t, v);
      const double a = truth.a(t, v);
      for (std::size_t r = 0; r < used.size(); ++r) {
        const EstimatorCurves& c = *used[r];
        se.scaled[0](r, j) = root_k * (c.gamma_plus[j] - params.gamma_plus[j]);
        se.scaled[1](r, j) = root_k * (c.gamma[j] - params.gamma(j));
        se.scaled[2](r, j) = root_k * (c.u_hat[j] - U) / a;
        se.scaled[3](r, j) = root_k * (c.a_hat[j] / a - 1.0);
      }
    }
    out.push_back(std::move(se));
  }
  return out;
}

double limit_variance(Statistic stat, double gamma) {
  const LimitVariances lv = limit_variances_gm0(gamma);
  switch (stat) {
    case Statistic::hill: return lv.var_gamma_P;
    case Statistic::moment: return lv.var_Gamma;
    case Statistic::location: return lv.var_U;
    case Statistic::scale: return lv.var_A;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<StatsRow> summarize_columns(const TimeGrid& grid, const Matrix& values,
                                        std::span<const double> var_limit) {
  if (values.cols() != grid.size() || var_limit.size() != grid.size()) {
    throw std::invalid_argument("summarize: grid size mismatch");
  }
  std::vector<StatsRow> rows;
  if (values.rows() == 0) return rows;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto col = values.column(j);
    StatsRow row;
    row.t = grid[j];
    row.mean = mean(col);
    row.var = values.rows() > 1 ? variance(col) : 0.0;
    row.var_limit = var_limit[j];
    const double sd = std::sqrt(var_limit[j]);
    row.ks = ks_statistic(std::vector<double>(col.begin(), col.end()),
                          [sd](double x) { return normal_cdf(x / sd); });
    row.ks_pvalue = ks_pvalue(row.ks, values.rows());
    rows.push_back(row);
  }
  return rows;
}

StatsReport summarize(const ReplicationSet& set) {
  const ExperimentConfig& cfg = set.config;
  StatsReport report;
  report.config = to_json(cfg);
  report.config_hash = config_hash(cfg);
  report.master_seed = cfg.seed;
  report.reps = set.reps.size();
  report.flagged = set.flagged();
  report.used = report.reps - report.flagged;
  for (const auto& rep : set.reps) report.seeds.push_back(rep.seed);

  const TimeGrid grid = make_grid(cfg.m);
  const TrueFunctions truth = true_functions(cfg.family, cfg.bound_exponent);
  const LimitParams params = truth.params(grid);

  switch (cfg.kind) {
    case ExperimentKind::consistency:
    case ExperimentKind::normality: {
      const auto errors = standardize(set, truth, params);
      std::vector<double> var_limit(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) var_limit[j] = limit_variance(cfg.statistic, params.gamma(j));
      report.rows = summarize_columns(grid, errors.back().at(cfg.statistic), var_limit);
      if (cfg.kind == ExperimentKind::consistency) {
        for (const auto& se : errors) {
          const double root_k = std::sqrt(static_cast<double>(se.k));
          for (Statistic stat : kAllStatistics) {
            const Matrix& mat = se.at(stat);
            std::vector<double> sups(mat.rows(), 0.0);
            for (std::size_t r = 0; r < mat.rows(); ++r) {
              for (std::size_t j = 0; j < mat.cols(); ++j) sups[r] = std::max(sups[r], std::abs(mat(r, j)) / root_k);
            }
            SupErrorRow row{se.n, se.k, stat, 0.0, 0.0};
            if (!sups.empty()) {
              row.median = quantile(sups, 0.5);
              row.q90 = quantile(sups, 0.9);
            }
            report.sup_errors.push_back(row);
          }
        }
      }
      break;
    }
    case ExperimentKind::tailcov:
    case ExperimentKind::quantile: {
      Matrix values(set.reps.size(), grid.size());
      for (std::size_t r = 0; r < set.reps.size(); ++r) {
        for (std::size_t j = 0; j < grid.size(); ++j) values(r, j) = set.reps[r].values[j];
      }
      const std::vector<double> unit(grid.size(), 1.0);
      report.rows = summarize_columns(grid, values, unit);
      if (cfg.kind == ExperimentKind::tailcov) {
        const MeasureOracle oracle = cfg.family == Family::moving_max ? MeasureOracle::moving_max(cfg.kernel)
                                                                       : MeasureOracle::pareto_gbm();
        for (std::size_t a = 0; a < grid.size(); ++a) {
          for (std::size_t b = a + 1; b < grid.size(); ++b) {
            report.covariances.push_back({grid[a], grid[b], covariance(values.column(a), values.column(b)),
                                          nu_intersection(oracle, grid[a], 1.0, grid[b], 1.0)});
          }
        }
      }
      break;
    }
    case ExperimentKind::oscillation: {
      OscillationResult total;
      const double log_inv = std::log(1.0 / cfg.oscillation.delta);
      total.threshold = cfg.oscillation.K * std::pow(log_inv, -3.0);
      total.bound = cfg.oscillation.c1 *
                    std::pow(log_inv, -(2.0 + 2.0 * cfg.oscillation.beta) / (1.0 - 2.0 * cfg.oscillation.beta));
      for (const auto& rep : set.reps) {
        total.conditioning += static_cast<std::size_t>(rep.values[0]);
        total.violations += static_cast<std::size_t>(rep.values[1]);
      }
      total.estimate = total.conditioning == 0
                           ? std::numeric_limits<double>::quiet_NaN()
                           : static_cast<double>(total.violations) / static_cast<double>(total.conditioning);
      report.oscillation = total;
      break;
    }
  }
  return report;
}

namespace {

// JSON has no NaN; null stands in for it.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double get_num(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool StatsReport::operator==(const StatsReport& o) const {
  const auto rows_equal = [&] {
    if (rows.size() != o.rows.size()) return false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& a = rows[i];
      const auto& b = o.rows[i];
      if (!(same_double(a.t, b.t) && same_double(a.mean, b.mean) && same_double(a.var, b.var) &&
            same_double(a.var_limit, b.var_limit) && same_double(a.ks, b.ks) &&
            same_double(a.ks_pvalue, b.ks_pvalue))) {
        return false;
      }
    }
    return true;
  };
  const auto osc_equal = [&] {
    if (oscillation.has_value() != o.oscillation.has_value()) return false;
    if (!oscillation) return true;
    const auto& a = *oscillation;
    const auto& b = *o.oscillation;
    return same_double(a.estimate, b.estimate) && a.conditioning == b.conditioning &&
           a.violations == b.violations && same_double(a.threshold, b.threshold) &&
           same_double(a.bound, b.bound);
  };
  return schema_version == o.schema_version && config == o.config && config_hash == o.config_hash &&
         master_seed == o.master_seed && seeds == o.seeds && reps == o.reps && used == o.used &&
         flagged == o.flagged && rows_equal() && sup_errors == o.sup_errors &&
         covariances == o.covariances && osc_equal();
}

void write_report_csv(std::ostream& out, const StatsReport& report) {
  out << "t,mean,var,var_limit,ks\n";
  for (const auto& r : report.rows) {
    out << format_double(r.t) << ',' << format_double(r.mean) << ',' << format_double(r.var) << ','
        << format_double(r.var_limit) << ',' << format_double(r.ks) << '\n';
  }
}

std::vector<StatsRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,mean,var,var_limit,ks") {
    throw std::runtime_error("report csv: unexpected header");
  }
  std::vector<StatsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::array<double, 5> v{};
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("report csv: short row '" + line + "'");
      v[i] = std::strtod(cell.c_str(), nullptr);
    }
    StatsRow row;
    row.t = v[0];
    row.mean = v[1];
    row.var = v[2];
    row.var_limit = v[3];
    row.ks = v[4];
    row.ks_pvalue = std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

json report_to_json(const StatsReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"t", num(r.t)},
                    {"mean", num(r.mean)},
                    {"var", num(r.var)},
                    {"var_limit", num(r.var_limit)},
                    {"ks", num(r.ks)},
                    {"ks_pvalue", num(r.ks_pvalue)}});
  }
  json sups = json::array();
  for (const auto& s : report.sup_errors) {
    sups.push_back({{"n", s.n},
                    {"k", s.k},
                    {"statistic", to_string(s.statistic)},
                    {"median", num(s.median)},
                    {"q90", num(s.q90)}});
  }
  json covs = json::array();
  for (const auto& c : report.covariances) {
    covs.push_back({{"t", num(c.t)}, {"s", num(c.s)}, {"empirical", num(c.empirical)}, {"oracle", num(c.oracle)}});
  }
  json j{{"schema_version", report.schema_version},
         {"config", report.config},
         {"config_hash", report.config_hash},
         {"master_seed", report.master_seed},
         {"seeds", report.seeds},
         {"reps", report.reps},
         {"used", report.used},
         {"flagged", report.flagged},
         {"rows", rows},
         {"sup_errors", sups},
         {"covariances", covs}};
  if (report.oscillation) {
    const auto& o = *report.oscillation;
    j["oscillation"] = {{"estimate", num(o.estimate)},
                        {"conditioning", o.conditioning},
                        {"violations", o.violations},
                        {"threshold", num(o.threshold)},
                        {"bound", num(o.bound)}};
  } else {
    j["oscillation"] = nullptr;
  }
  return j;
}

StatsReport report_from_json(const json& j) {
  StatsReport r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != StatsReport::kSchemaVersion) {
      throw std::runtime_error("report json: unsupported schema version " + std::to_string(r.schema_version));
    }
    r.config = j.at("config");
    r.config_hash = j.at("config_hash").get<std::string>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.reps = j.at("reps").get<std::size_t>();
    r.used = j.at("used").get<std::size_t>();
    r.flagged = j.at("flagged").get<std::size_t>();
    for (const auto& e : j.at("rows")) {
      r.rows.push_back({get_num(e.at("t")), get_num(e.at("mean")), get_num(e.at("var")),
                        get_num(e.at("var_limit")), get_num(e.at("ks")), get_num(e.at("ks_pvalue"))});
    }
    for (const auto& e : j.at("sup_errors")) {
      r.sup_errors.push_back({e.at("n").get<std::size_t>(), e.at("k").get<std::size_t>(),
                              parse_statistic(e.at("statistic").get<std::string>()), get_num(e.at("median")),
                              get_num(e.at("q90"))});
    }
    for (const auto& e : j.at("covariances")) {
      r.covariances.push_back(
          {get_num(e.at("t")), get_num(e.at("s")), get_num(e.at("empirical")), get_num(e.at("oracle"))});
    }
    const json& o = j.at("oscillation");
    if (!o.is_null()) {
      OscillationResult res;
      res.estimate = get_num(o.at("estimate"));
      res.conditioning = o.at("conditioning").get<std::size_t>();
      res.violations = o.at("violations").get<std::size_t>();
      res.threshold = get_num(o.at("threshold"));
      res.bound = get_num(o.at("bound"));
      r.oscillation = res;
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("report json: ") + e.what());
  }
  return r;
}

void export_report(const StatsReport& report, const std::string& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (format == OutputFormat::csv) {
    write_report_csv(out, report);
  } else {
    out << report_to_json(report).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

StatsReport import_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
  return report_from_json(j);
}

std::vector<std::string> check_report(const StatsReport& report, const ExperimentConfig& cfg) {
  std::vector<std::string> failures;
  const TimeGrid grid = make_grid(cfg.m);
  const auto judge_rows = [&] {
    if (report.rows.empty()) {
      failures.push_back("no usable replications");
      return;
    }
    for (double t : cfg.ks_times) {
      const StatsRow& row = report.rows[grid.nearest(t)];
      const double ratio = row.var / row.var_limit;
      if (!(std::abs(ratio - 1.0) <= cfg.tolerance)) {
        failures.push_back("t=" + format_double(row.t) + ": variance " + format_double(row.var) +
                           " outside limit " + format_double(row.var_limit) + " +/- " +
                           format_double(cfg.tolerance) + " relative");
      }
      if (!(row.ks_pvalue >= cfg.ks_alpha)) {
        failures.push_back("t=" + format_double(row.t) + ": KS p-value " + format_double(row.ks_pvalue) +
                           " below " + format_double(cfg.ks_alpha));
      }
    }
  };
  switch (cfg.kind) {
    case ExperimentKind::normality:
    case ExperimentKind::quantile:
      judge_rows();
      break;
    case ExperimentKind::consistency:
      for (Statistic stat : kAllStatistics) {
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& s : report.sup_errors) {
          if (s.statistic != stat) continue;
          if (!(s.median < prev)) {
            failures.push_back(std::string(to_string(stat)) + ": median sup error not decreasing at n=" +
                               std::to_string(s.n));
          }
          prev = s.median;
        }
      }
      break;
    case ExperimentKind::tailcov:
      for (const auto& c : report.covariances) {
        if (!(std::abs(c.empirical - c.oracle) <= cfg.tolerance)) {
          failures.push_back("cov(" + format_double(c.t) + "," + format_double(c.s) + ") = " +
                             format_double(c.empirical) + " vs oracle " + format_double(c.oracle));
        }
      }
      break;
    case ExperimentKind::oscillation:
      if (!report.oscillation || report.oscillation->conditioning == 0) {
        failures.push_back("oscillation: no conditioning exceedances");
      } else if (!(report.oscillation->estimate <= report.oscillation->bound)) {
        failures.push_back("oscillation: estimate " + format_double(report.oscillation->estimate) +
                           " exceeds bound " + format_double(report.oscillation->bound));
      }
      break;
  }
  return failures;
}

}  // namespace funcevt
