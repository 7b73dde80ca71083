// funcevt command-line interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "funcevt/estimators.hpp"
#include "funcevt/experiment.hpp"
#include "funcevt/exponent_measure.hpp"
#include "funcevt/limit_theory.hpp"
#include "funcevt/process_sim.hpp"
#include "funcevt/tail_process.hpp"

namespace {

using namespace funcevt;
using nlohmann::json;

struct KernelOptions {
  std::string shape = "dexp";
  double lambda = 1.0;
  double df = 3.0;

  void add(CLI::App* app) {
    app->add_option("--kernel", shape, "moving-max kernel (dexp|t)")->check(CLI::IsMember({"dexp", "t"}));
    app->add_option("--lambda", lambda, "kernel scale");
    app->add_option("--df", df, "Student-t degrees of freedom");
  }
  KernelSpec spec() const {
    KernelSpec k{parse_kernel_shape(shape), lambda, df};
    k.validate();
    return k;
  }
};

CLI::Validator family_check() { return CLI::IsMember({"moving-max", "pareto-gbm"}); }

// Writes to path, or stdout for "-" / empty.
template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

ParetoPaths as_pareto(const GridTable& table) {
  return ParetoPaths(table.grid(), table.values());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional extreme value estimation in C[0,1]"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate i.i.d. paths on a uniform grid");
  std::string sim_family, sim_out;
  std::size_t sim_n = 1000, sim_grid = 11;
  std::uint64_t sim_seed = 0;
  double sim_window = 0.0, sim_eps = 1e-6;
  KernelOptions sim_kernel;
  sim->add_option("--family", sim_family)->required()->check(family_check());
  sim->add_option("--n", sim_n, "number of paths")->required();
  sim->add_option("--grid", sim_grid, "grid size m")->required();
  sim->add_option("--seed", sim_seed)->required();
  sim->add_option("--window", sim_window, "moving-max Poisson window half-width (0 = automatic)");
  sim->add_option("--eps", sim_eps, "moving-max truncation tolerance");
  sim_kernel.add(sim);
  sim->add_option("--out", sim_out, "output CSV")->required();

  // transform
  auto* tr = app.add_subcommand("transform", "standard Pareto transform of simulated paths");
  std::string tr_in, tr_family, tr_out;
  double tr_bound = 1.5;
  tr->add_option("--in", tr_in)->required();
  tr->add_option("--family", tr_family)->required()->check(family_check());
  tr->add_option("--bound-exponent", tr_bound);
  tr->add_option("--out", tr_out)->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "estimator curves from a path CSV");
  std::string est_in, est_out;
  std::size_t est_k = 0;
  est->add_option("--in", est_in)->required();
  est->add_option("--k", est_k)->required();
  est->add_option("--out", est_out);

  // tailproc
  auto* tp = app.add_subcommand("tailproc", "tail empirical process on a t x x grid");
  std::string tp_in, tp_out;
  std::size_t tp_k = 0, tp_xgrid = 64;
  double tp_beta = 0.25, tp_c = 1.0;
  tp->add_option("--in", tp_in)->required();
  tp->add_option("--k", tp_k)->required();
  tp->add_option("--beta", tp_beta);
  tp->add_option("--c", tp_c);
  tp->add_option("--xgrid", tp_xgrid, "number of geometric x points on [c, n/k]");
  tp->add_option("--out", tp_out);

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "oscillation diagnostic on a Pareto-scale CSV");
  std::string dg_in, dg_variant = "ratio";
  OscillationConfig dg_cfg;
  dg->add_option("--in", dg_in)->required();
  dg->add_option("--s", dg_cfg.s);
  dg->add_option("--delta", dg_cfg.delta);
  dg->add_option("--v", dg_cfg.v);
  dg->add_option("--K", dg_cfg.K);
  dg->add_option("--beta", dg_cfg.beta);
  dg->add_option("--c1", dg_cfg.c1);
  dg->add_option("--variant", dg_variant)->check(CLI::IsMember({"ratio", "log"}));

  // nu
  auto* nu = app.add_subcommand("nu", "exponent measure of C_{t,x} intersect C_{s,y}");
  std::string nu_family;
  double nu_t = 0.0, nu_s = 0.0, nu_x = 1.0, nu_y = 1.0;
  KernelOptions nu_kernel;
  nu->add_option("--family", nu_family)->required()->check(family_check());
  nu->add_option("--t", nu_t)->required();
  nu->add_option("--s", nu_s)->required();
  nu->add_option("--x", nu_x)->required();
  nu->add_option("--y", nu_y)->required();
  nu_kernel.add(nu);

  // limit
  auto* lim = app.add_subcommand("limit", "draws of the limiting field and its functionals");
  std::string lim_family, lim_out;
  std::size_t lim_t = 3, lim_x = 128, lim_draws = 1000;
  std::uint64_t lim_seed = 0;
  double lim_xmax = 1e4;
  KernelOptions lim_kernel;
  lim->add_option("--family", lim_family)->required()->check(family_check());
  lim->add_option("--tgrid", lim_t, "number of grid times")->required();
  lim->add_option("--xgrid", lim_x, "number of geometric x points on [1, x-max]")->required();
  lim->add_option("--x-max", lim_xmax);
  lim->add_option("--draws", lim_draws)->required();
  lim->add_option("--seed", lim_seed)->required();
  lim_kernel.add(lim);
  lim->add_option("--out", lim_out);

  // experiment
  auto* ex = app.add_subcommand("experiment", "run a Monte Carlo experiment from a JSON config");
  std::string ex_config;
  std::size_t ex_workers = 0;
  bool ex_check = false;
  ex->add_option("--config", ex_config)->required();
  ex->add_option("--workers", ex_workers, "worker threads (default: FUNCEVT_WORKERS or all cores)");
  ex->add_flag("--check", ex_check, "exit with code 2 when acceptance thresholds are violated");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      SimConfig cfg;
      cfg.n = sim_n;
      cfg.seed = sim_seed;
      cfg.window = sim_window;
      cfg.eps_trunc = sim_eps;
      const PathSample sample = simulate(parse_family(sim_family), sim_kernel.spec(), make_grid(sim_grid), cfg);
      write_csv_file(sim_out, sample);
    } else if (*tr) {
      const GridTable table = read_csv_file(tr_in);
      const Family family = parse_family(tr_family);
      MarginalModel model;
      model.family = family;
      model.bound_exponent = tr_bound;
      const ParetoPaths zeta = pareto_transform(PathSample(table.grid(), table.values(), family), model);
      write_csv_file(tr_out, zeta);
      if (zeta.clamped() > 0) std::cerr << "warning: " << zeta.clamped() << " tail values floored\n";
    } else if (*est) {
      const EstimatorCurves curves = estimate_curves(read_csv_file(est_in), est_k);
      with_output(est_out, [&](std::ostream& out) { write_curves_csv(out, curves); });
      if (curves.flagged() > 0) std::cerr << "warning: " << curves.flagged() << " degenerate grid points\n";
    } else if (*tp) {
      const ParetoPaths zeta = as_pareto(read_csv_file(tp_in));
      const TailField field =
          tail_field(zeta, tp_k, tp_beta, tp_c, tail_xgrid(zeta.paths(), tp_k, tp_c, tp_xgrid));
      with_output(tp_out, [&](std::ostream& out) {
        out << "t,x,w\n";
        for (std::size_t j = 0; j < field.tgrid.size(); ++j) {
          for (std::size_t i = 0; i < field.xgrid.size(); ++i) {
            out << format_double(field.tgrid[j]) << ',' << format_double(field.xgrid[i]) << ','
                << format_double(field.values(j, i)) << '\n';
          }
        }
      });
    } else if (*dg) {
      dg_cfg.variant = dg_variant == "log" ? OscillationVariant::log : OscillationVariant::ratio;
      const OscillationResult r = oscillation_diagnostic(as_pareto(read_csv_file(dg_in)), dg_cfg);
      std::cout << json{{"estimate", r.estimate},
                        {"conditioning", r.conditioning},
                        {"violations", r.violations},
                        {"threshold", r.threshold},
                        {"bound", r.bound}}
                       .dump(2)
                << '\n';
    } else if (*nu) {
      const MeasureOracle oracle = parse_family(nu_family) == Family::moving_max
                                       ? MeasureOracle::moving_max(nu_kernel.spec())
                                       : MeasureOracle::pareto_gbm();
      std::printf("%.12g\n", nu_intersection(oracle, nu_t, nu_x, nu_s, nu_y));
    } else if (*lim) {
      const Family family = parse_family(lim_family);
      const MeasureOracle oracle =
          family == Family::moving_max ? MeasureOracle::moving_max(lim_kernel.spec()) : MeasureOracle::pareto_gbm();
      const TimeGrid tgrid = make_grid(lim_t);
      const std::vector<double> xgrid = functional_xgrid(lim_xmax, lim_x);
      const LimitParams params = true_functions(family).params(tgrid);
      const auto draws = simulate_limit_field(oracle, tgrid, xgrid, lim_draws, lim_seed);
      std::vector<LimitFunctionals> fs;
      for (const auto& d : draws) fs.push_back(limit_functionals(d, xgrid, params));

      json jdraws = json::array();
      for (const auto& f : fs) {
        jdraws.push_back({{"P", f.P}, {"Q", f.Q}, {"Gamma", f.Gamma}, {"U", f.U}, {"A", f.A}});
      }
      json summary = json::array();
      for (std::size_t j = 0; j < tgrid.size(); ++j) {
        std::vector<double> P, Q, G, U, A;
        for (const auto& f : fs) {
          P.push_back(f.P[j]);
          Q.push_back(f.Q[j]);
          G.push_back(f.Gamma[j]);
          U.push_back(f.U[j]);
          A.push_back(f.A[j]);
        }
        const LimitVariances lv = limit_variances_gm0(params.gamma(j));
        summary.push_back({{"t", tgrid[j]},
                           {"var_P", variance(P)},
                           {"var_Q", variance(Q)},
                           {"cov_P_Q", covariance(P, Q)},
                           {"var_Gamma", variance(G)},
                           {"var_U", variance(U)},
                           {"var_A", variance(A)},
                           {"limit", {{"var_P", lv.var_P},
                                      {"var_Q", lv.var_Q},
                                      {"cov_P_Q", lv.cov_P_Q},
                                      {"var_Gamma", lv.var_Gamma},
                                      {"var_U", lv.var_U},
                                      {"var_A", lv.var_A}}}});
      }
      const json doc{{"family", lim_family},
                     {"tgrid", tgrid.points()},
                     {"xgrid", xgrid},
                     {"seed", lim_seed},
                     {"summary", summary},
                     {"draws", jdraws}};
      with_output(lim_out, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
    } else if (*ex) {
      const ExperimentConfig cfg = load_config(ex_config);
      const std::size_t workers = ex_workers > 0 ? ex_workers : default_workers();
      const StatsReport report = summarize(run_replications(cfg, workers));
      if (cfg.output.empty()) {
        if (cfg.format == OutputFormat::csv) {
          write_report_csv(std::cout, report);
        } else {
          std::cout << report_to_json(report).dump(2) << '\n';
        }
      } else {
        export_report(report, cfg.output, cfg.format);
      }
      if (report.flagged > 0) std::cerr << "warning: " << report.flagged << " replications flagged degenerate\n";
      if (ex_check) {
        const auto failures = check_report(report, cfg);
        for (const auto& f : failures) std::cerr << "check failed: " << f << '\n';
        if (!failures.empty()) return 2;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
