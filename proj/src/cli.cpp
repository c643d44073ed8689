#include "wavecqr/cli.hpp"

#include "wavecqr/errors.hpp"
#include "wavecqr/experiment.hpp"
#include "wavecqr/io.hpp"
#include "wavecqr/metrics.hpp"
#include "wavecqr/parallel.hpp"
#include "wavecqr/simgen.hpp"
#include "wavecqr/socp.hpp"
#include "wavecqr/stability.hpp"
#include "wavecqr/tuning.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace wavecqr::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataOpts {
  std::string curves, scalars, response;
  bool standardize = false;
};

struct LevelOpts {
  std::vector<double> tau;
  int levels = 9;

  QuantileLevels resolve() const {
    if (!tau.empty()) {
      std::vector<double> t = tau;
      std::sort(t.begin(), t.end());
      return QuantileLevels(t);
    }
    return QuantileLevels::equally_spaced(levels);
  }
};

struct Common {
  std::string config;
  std::string out_dir;
  std::string filter = "sym6";
  bool strict = false;
  int threads = 0;
};

void add_data(CLI::App* app, DataOpts& d, bool required = true) {
  auto* c = app->add_option("--curves", d.curves,
                            "Curves CSV: columns sample,predictor,t0..t{N-1}; one row per (sample, predictor), "
                            "zero-based indices");
  auto* r = app->add_option("--response", d.response, "Response CSV: single column y");
  if (required) {
    c->required();
    r->required();
  }
  app->add_option("--scalars", d.scalars, "Scalar covariates CSV: columns u1..uq, one row per sample (optional)");
  app->add_flag("--standardize", d.standardize, "Rescale scalar covariates to unit sample variance");
}

void add_levels(CLI::App* app, LevelOpts& l) {
  app->add_option("--tau", l.tau, "Quantile level(s); overrides --levels")->check(CLI::Range(0.0, 1.0));
  app->add_option("--levels", l.levels, "Number K of equally spaced levels k/(K+1)")->check(CLI::PositiveNumber);
}

void add_solver(CLI::App* app, SolverConfig& s) {
  app->add_option("--eta", s.eta, "Outer augmented Lagrangian parameter");
  app->add_option("--eta1", s.eta1, "Inner augmented Lagrangian parameter");
  app->add_option("--eps-abs", s.eps_abs, "Outer absolute tolerance");
  app->add_option("--eps-rel", s.eps_rel, "Outer relative tolerance");
  app->add_option("--inner-eps-abs", s.inner_eps_abs, "Inner absolute tolerance");
  app->add_option("--inner-eps-rel", s.inner_eps_rel, "Inner relative tolerance");
  app->add_option("--max-outer", s.max_outer, "Outer iteration cap");
  app->add_option("--max-inner", s.max_inner, "Inner iteration cap per outer iteration");
}

void add_common(CLI::App* app, Common& c, bool out_required = true) {
  app->add_option("--config", c.config, "JSON file of option values keyed by long option name; flags override it");
  auto* o = app->add_option("--out-dir", c.out_dir, "Output directory (must exist)");
  if (out_required) o->required();
}

Dataset load_data(const DataOpts& d) {
  Dataset data = io::read_dataset(d.curves, d.scalars, d.response);
  if (d.standardize) standardize_scalars(data);
  return data;
}

fs::path out_path(const Common& c, const std::string& name) { return fs::path(c.out_dir) / name; }

void check_out_dir(const Common& c) {
  if (!c.out_dir.empty() && !fs::is_directory(c.out_dir)) {
    throw UsageError("output directory '" + c.out_dir + "' does not exist");
  }
}

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char ch;
  while (in.get(ch)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json solver_json(const SolverConfig& s) {
  return {{"eta", s.eta},           {"eta1", s.eta1},
          {"eps_abs", s.eps_abs},   {"eps_rel", s.eps_rel},
          {"inner_eps_abs", s.inner_eps_abs}, {"inner_eps_rel", s.inner_eps_rel},
          {"max_outer", s.max_outer}, {"max_inner", s.max_inner}};
}

json fit_json(const FitResult& f) {
  return {{"outer_iters", f.outer_iters},
          {"inner_iters_total", f.inner_iters_total},
          {"primal_residual", f.primal_residual},
          {"dual_residual", f.dual_residual},
          {"primal_threshold", f.thresholds.primal},
          {"dual_threshold", f.thresholds.dual},
          {"objective", f.objective},
          {"converged", f.converged},
          {"merit_increases", f.merit_increases},
          {"support_size", f.support_size()},
          {"support_blocks", f.support_blocks()}};
}

std::string provenance(const std::string& command, const json& resolved) {
  return "wavecqr " + command + "\nconfig " + resolved.dump();
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

/// Appends option values from the JSON config for every option that was not
/// given on the command line. Unknown keys are usage errors.
std::vector<std::string> config_args(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  std::vector<std::string> extra;
  auto scalar = [&](const json& v, const std::string& key) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return io::format_double(v.get<double>());
    throw UsageError("config key '" + key + "' has an unsupported value type");
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw UsageError("config files cannot nest --config");
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    if (value.is_boolean()) {
      if (opt->get_expected_min() != 0) throw UsageError("config key '" + key + "' is not a flag");
      if (value.get<bool>()) extra.push_back("--" + key);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        extra.push_back("--" + key);
        extra.push_back(scalar(v, key));
      }
    } else {
      extra.push_back("--" + key);
      extra.push_back(scalar(value, key));
    }
  }
  return extra;
}

json data_json(const DataOpts& d) {
  return {{"curves", d.curves}, {"scalars", d.scalars}, {"response", d.response}, {"standardize", d.standardize}};
}

int warn_or_fail(bool converged, bool strict, const std::string& what, std::ostream& err) {
  if (converged) return kOk;
  if (strict) {
    err << "wavecqr: error[convergence]: " << what << " did not converge\n";
    return kNotConverged;
  }
  err << "wavecqr: warning[convergence]: " << what << " did not converge\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wavelet-domain penalized composite quantile regression with functional predictors"};
  app.name("wavecqr");
  app.require_subcommand(1);

  // simulate
  Common sim_c;
  sim::SimConfig sim_cfg;
  std::string sim_noise = "normal";
  std::uint64_t sim_seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a simulated dataset (12 curves, 2 scalars)");
  add_common(sim_cmd, sim_c);
  sim_cmd->add_option("--n", sim_cfg.n, "Number of samples")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--snr", sim_cfg.snr, "Signal-to-noise ratio |mean signal| / sigma (inf for no noise)");
  sim_cmd->add_option("--noise", sim_noise, "Noise family: normal, mixture, t3, cauchy (or 1-4)");
  sim_cmd->add_option("--seed", sim_seed, "Random seed");
  sim_cmd->add_option("--grid-len", sim_cfg.grid_len, "Grid points N (power of two)");
  sim_cmd->add_option("--filter", sim_cfg.filter, "Wavelet filter: haar, sym6, db1..db4");

  // fit
  Common fit_c;
  DataOpts fit_d;
  LevelOpts fit_l;
  SolverConfig fit_s;
  PenaltySpec fit_pen;
  std::string fit_trace;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one penalized model");
  add_common(fit_cmd, fit_c);
  add_data(fit_cmd, fit_d);
  add_levels(fit_cmd, fit_l);
  add_solver(fit_cmd, fit_s);
  fit_cmd->add_option("--lambda1", fit_pen.lambda1, "L1 penalty weight")->required();
  fit_cmd->add_option("--lambda2", fit_pen.lambda2, "Group L2 penalty weight")->required();
  fit_cmd->add_option("--filter", fit_c.filter, "Wavelet filter: haar, sym6, db1..db4");
  fit_cmd->add_option("--trace", fit_trace, "Write one JSON line per outer iteration to this file");
  fit_cmd->add_flag("--strict", fit_c.strict, "Exit with status 3 when the solver does not converge");

  // tune
  Common tune_c;
  DataOpts tune_d;
  DataOpts tune_v;
  LevelOpts tune_l;
  SolverConfig tune_s;
  std::string tune_method = "qSGL", tune_crit = "gic";
  double tune_ratio = 0.5, tune_min = 1e-3;
  int tune_size = 30;
  auto* tune_cmd = app.add_subcommand("tune", "Fit a penalty path and select lambda by GIC or a tuning set");
  add_common(tune_cmd, tune_c);
  add_data(tune_cmd, tune_d);
  add_levels(tune_cmd, tune_l);
  add_solver(tune_cmd, tune_s);
  tune_cmd->add_option("--tune-curves", tune_v.curves, "Tuning-set curves CSV (required for validation)");
  tune_cmd->add_option("--tune-scalars", tune_v.scalars, "Tuning-set scalars CSV");
  tune_cmd->add_option("--tune-response", tune_v.response, "Tuning-set response CSV");
  tune_cmd->add_option("--method", tune_method, "qSGL, qL or qGL");
  tune_cmd->add_option("--criterion", tune_crit, "gic or validation (alias gs)");
  tune_cmd->add_option("--ratio", tune_ratio, "lambda1 / lambda2 for qSGL");
  tune_cmd->add_option("--grid-size", tune_size, "Number of path points")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--grid-min", tune_min, "Smallest path point as a fraction of lambda_max");
  tune_cmd->add_option("--filter", tune_c.filter, "Wavelet filter: haar, sym6, db1..db4");
  tune_cmd->add_flag("--strict", tune_c.strict, "Exit with status 3 when the selected fit did not converge");

  // evaluate
  Common ev_c;
  DataOpts ev_d;
  LevelOpts ev_l;
  std::string ev_coef, ev_truth_beta, ev_truth_coef;
  auto* ev_cmd = app.add_subcommand("evaluate", "Compare estimated coefficients with the true slopes");
  add_common(ev_cmd, ev_c);
  add_data(ev_cmd, ev_d, false);
  add_levels(ev_cmd, ev_l);
  ev_cmd->add_option("--coefficients", ev_coef, "Estimated coefficients CSV (kind,index,value)")->required();
  ev_cmd->add_option("--truth-beta", ev_truth_beta, "True slope curves CSV (predictor,t0..)")->required();
  ev_cmd->add_option("--truth-coefficients", ev_truth_coef, "True coefficients CSV; enables VA");
  ev_cmd->add_option("--filter", ev_c.filter, "Wavelet filter: haar, sym6, db1..db4");

  // export-socp
  Common so_c;
  DataOpts so_d;
  LevelOpts so_l;
  PenaltySpec so_pen;
  std::string so_out = "problem.socp";
  auto* so_cmd = app.add_subcommand("export-socp", "Write the second-order cone reformulation");
  add_common(so_cmd, so_c);
  add_data(so_cmd, so_d);
  add_levels(so_cmd, so_l);
  so_cmd->add_option("--lambda1", so_pen.lambda1, "L1 penalty weight")->required();
  so_cmd->add_option("--lambda2", so_pen.lambda2, "Group L2 penalty weight")->required();
  so_cmd->add_option("--filter", so_c.filter, "Wavelet filter: haar, sym6, db1..db4");
  so_cmd->add_option("--name", so_out, "Output file name inside --out-dir");

  // stability-select
  Common st_c;
  DataOpts st_d;
  LevelOpts st_l;
  SolverConfig st_s;
  StabilityConfig st_cfg;
  std::string st_method = "qSGL";
  auto* st_cmd = app.add_subcommand("stability-select", "Bootstrap stability selection of functional predictors");
  add_common(st_cmd, st_c);
  add_data(st_cmd, st_d);
  add_levels(st_cmd, st_l);
  add_solver(st_cmd, st_s);
  st_cmd->add_option("--bootstraps", st_cfg.bootstraps, "Number of bootstrap samples")->check(CLI::PositiveNumber);
  st_cmd->add_option("--threshold", st_cfg.norm_threshold, "Median norm threshold for selection");
  st_cmd->add_option("--seed", st_cfg.seed, "Random seed");
  st_cmd->add_option("--method", st_method, "qSGL, qL or qGL");
  st_cmd->add_option("--ratio", st_cfg.ratio, "lambda1 / lambda2 for qSGL");
  st_cmd->add_option("--grid-size", st_cfg.grid_size, "Number of path points")->check(CLI::PositiveNumber);
  st_cmd->add_option("--grid-min", st_cfg.grid_min_fraction, "Smallest path point as a fraction of lambda_max");
  st_cmd->add_option("--threads", st_c.threads, "Worker threads (0 = all cores)");
  st_cmd->add_option("--filter", st_c.filter, "Wavelet filter: haar, sym6, db1..db4");

  // reproduce table1-row
  Common rp_c;
  ExperimentConfig rp_cfg;
  SolverConfig& rp_s = rp_cfg.solver;
  std::string rp_noise = "normal", rp_method = "all", rp_crit = "all";
  auto* rp_cmd = app.add_subcommand("reproduce", "End-to-end simulation study");
  rp_cmd->require_subcommand(1);
  auto* t1_cmd = rp_cmd->add_subcommand("table1-row", "Monte Carlo replicates of one simulation setting");
  add_common(t1_cmd, rp_c, false);
  add_solver(t1_cmd, rp_s);
  t1_cmd->add_option("--n", rp_cfg.n, "Training set size (tuning n, test 10n)")->check(CLI::PositiveNumber);
  t1_cmd->add_option("--noise", rp_noise, "Noise family: normal, mixture, t3, cauchy (or 1-4)");
  t1_cmd->add_option("--snr", rp_cfg.snr, "Signal-to-noise ratio");
  t1_cmd->add_option("--reps", rp_cfg.reps, "Monte Carlo replicates")->check(CLI::PositiveNumber);
  t1_cmd->add_option("--seed", rp_cfg.seed, "Master seed");
  t1_cmd->add_option("--method", rp_method, "qSGL, qL, qGL or all");
  t1_cmd->add_option("--criterion", rp_crit, "gic, gs (validation) or all");
  t1_cmd->add_option("--tau", rp_cfg.taus, "Quantile level(s)")->check(CLI::Range(0.0, 1.0));
  t1_cmd->add_option("--ratio", rp_cfg.ratio, "lambda1 / lambda2 for qSGL");
  t1_cmd->add_option("--grid-size", rp_cfg.grid_size, "Number of path points")->check(CLI::PositiveNumber);
  t1_cmd->add_option("--grid-min", rp_cfg.grid_min_fraction, "Smallest path point as a fraction of lambda_max");
  t1_cmd->add_option("--grid-len", rp_cfg.grid_len, "Grid points N (power of two)");
  t1_cmd->add_option("--filter", rp_cfg.filter, "Wavelet filter: haar, sym6, db1..db4");
  t1_cmd->add_option("--threads", rp_c.threads, "Worker threads (0 = all cores)");
  t1_cmd->add_flag("--strict", rp_c.strict, "Exit with status 3 when a selected fit did not converge");

  CLI::App* leaf = nullptr;
  Common* leaf_common = nullptr;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::RequiredError&) {
      // Required values may come from the config file; the reparse below
      // enforces them.
      const bool has_config = std::any_of(args.begin(), args.end(), [](const std::string& a) {
        return a == "--config" || a.rfind("--config=", 0) == 0;
      });
      if (!has_config) throw;
    }
    const std::pair<CLI::App*, Common*> leaves[] = {{sim_cmd, &sim_c}, {fit_cmd, &fit_c},   {tune_cmd, &tune_c},
                                                    {ev_cmd, &ev_c},   {so_cmd, &so_c},     {st_cmd, &st_c},
                                                    {t1_cmd, &rp_c}};
    for (const auto& [cmd, common] : leaves) {
      if (cmd->parsed()) {
        leaf = cmd;
        leaf_common = common;
      }
    }
    if (leaf != nullptr && !leaf_common->config.empty()) {
      std::vector<std::string> merged = args;
      const auto extra = config_args(leaf, leaf_common->config);
      merged.insert(merged.end(), extra.begin(), extra.end());
      app.clear();
      std::vector<std::string> rev2(merged.rbegin(), merged.rend());
      app.parse(rev2);
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "wavecqr: error[usage]: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "wavecqr: error[usage]: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (leaf_common) check_out_dir(*leaf_common);

    if (sim_cmd->parsed()) {
      sim_cfg.noise = sim::noise_from_name(sim_noise);
      sim_cfg.seed = sim_seed;
      const sim::SimulatedDataset s = sim::gen_dataset(sim_cfg);
      json resolved = {{"n", sim_cfg.n},           {"snr", sim_cfg.snr},
                       {"noise", std::string(sim::noise_name(sim_cfg.noise))},
                       {"seed", sim_cfg.seed},     {"grid_len", sim_cfg.grid_len},
                       {"filter", sim_cfg.filter}};
      const std::string prov = provenance("simulate", resolved);
      const auto curves = out_path(sim_c, "curves.csv");
      const auto scalars = out_path(sim_c, "scalars.csv");
      const auto response = out_path(sim_c, "response.csv");
      const auto beta = out_path(sim_c, "truth_beta.csv");
      const auto coef = out_path(sim_c, "truth_coefficients.csv");
      io::write_dataset(s.data, curves, scalars, response, prov);
      io::write_curves_matrix(beta, s.beta_true, prov);
      CoefficientSet truth;
      truth.m = s.data.m;
      truth.grid_len = s.data.grid_len;
      truth.alpha = VectorXd::Zero(1);
      truth.gamma = s.gamma_true;
      truth.theta = s.theta_true_flat();
      io::write_coefficients(coef, truth, prov);
      json sidecar = {{"config", resolved},
                      {"sigma", s.sigma},
                      {"signal_mean", s.signal_mean},
                      {"true_support", s.true_support()},
                      {"checksums_fnv1a64",
                       {{"curves.csv", fnv1a_file(curves)},
                        {"scalars.csv", fnv1a_file(scalars)},
                        {"response.csv", fnv1a_file(response)},
                        {"truth_beta.csv", fnv1a_file(beta)},
                        {"truth_coefficients.csv", fnv1a_file(coef)}}}};
      write_json(out_path(sim_c, "simulate.json"), sidecar);
      out << "sigma " << io::format_double(s.sigma) << "\nsignal_mean " << io::format_double(s.signal_mean) << '\n';
      return kOk;
    }

    if (fit_cmd->parsed()) {
      fit_s.validate();
      fit_pen.validate();
      const Dataset data = load_data(fit_d);
      const QuantileLevels taus = fit_l.resolve();
      const WaveletFilter filter = WaveletFilter::from_name(fit_c.filter);
      const Design design = build_design(data, filter);
      std::ofstream trace;
      if (!fit_trace.empty()) {
        io::require_writable_parent(fit_trace);
        trace.open(fit_trace);
        if (!trace) throw DataError("cannot open trace file '" + fit_trace + "'");
        fit_s.trace = &trace;
      }
      const FitResult f = fit(design, data.response, taus, fit_pen, fit_s);
      json resolved = {{"data", data_json(fit_d)},   {"taus", taus.values()}, {"filter", fit_c.filter},
                       {"lambda1", fit_pen.lambda1}, {"lambda2", fit_pen.lambda2}, {"solver", solver_json(fit_s)}};
      const std::string prov = provenance("fit", resolved);
      io::write_coefficients(out_path(fit_c, "coefficients.csv"), f.params, prov);
      io::write_curves_matrix(out_path(fit_c, "beta.csv"), reconstruct_betas(f.params, filter), prov);
      write_json(out_path(fit_c, "diagnostics.json"), {{"config", resolved}, {"fit", fit_json(f)}});
      out << "objective " << io::format_double(f.objective) << "\nconverged " << (f.converged ? "true" : "false")
          << "\nsupport_blocks " << f.support_blocks().size() << '\n';
      return warn_or_fail(f.converged, fit_c.strict, "fit", err);
    }

    if (tune_cmd->parsed()) {
      tune_s.validate();
      const Dataset train = load_data(tune_d);
      TuningGrid grid;
      grid.method = method_from_name(tune_method);
      grid.criterion = criterion_from_name(tune_crit);
      grid.ratio = tune_ratio;
      const bool have_tune = !tune_v.curves.empty() || !tune_v.response.empty();
      if (grid.criterion == Criterion::validation && !have_tune) {
        throw UsageError("criterion validation needs --tune-curves and --tune-response");
      }
      if (have_tune && (tune_v.curves.empty() || tune_v.response.empty())) {
        throw UsageError("--tune-curves and --tune-response must be given together");
      }
      tune_v.standardize = tune_d.standardize;
      const Dataset tune = have_tune ? load_data(tune_v) : train;
      const QuantileLevels taus = tune_l.resolve();
      const WaveletFilter filter = WaveletFilter::from_name(tune_c.filter);
      const Design d_train = build_design(train, filter);
      const Design d_tune = build_design(tune, filter);
      grid.values = log_spaced_path(lambda_max(d_train, train.response, taus, grid.method, grid.ratio), tune_size,
                                    tune_min);
      const double phi = phi_n_default(d_train.n(), d_train.p(), grid.method);
      const GridSearchResult res =
          grid_search(d_train, train.response, d_tune, tune.response, grid, taus, tune_s, phi);
      json resolved = {{"data", data_json(tune_d)},
                       {"tune_data", have_tune ? data_json(tune_v) : json(nullptr)},
                       {"taus", taus.values()},
                       {"filter", tune_c.filter},
                       {"method", std::string(method_name(grid.method))},
                       {"criterion", std::string(criterion_name(grid.criterion))},
                       {"ratio", grid.ratio},
                       {"grid_size", tune_size},
                       {"grid_min", tune_min},
                       {"phi_n", phi},
                       {"solver", solver_json(tune_s)}};
      const std::string prov = provenance("tune", resolved);
      io::Table path;
      path.header = {"index", "lambda1", "lambda2", "gic", "tune_loss", "support_size", "support_groups",
                     "outer_iters", "converged"};
      for (std::size_t g = 0; g < res.path.size(); ++g) {
        const PathPoint& p = res.path[g];
        path.rows.push_back({static_cast<double>(g), p.lambda1, p.lambda2, p.gic.value, p.tune_loss,
                             static_cast<double>(p.support_size), static_cast<double>(p.support_groups),
                             static_cast<double>(p.outer_iters), p.converged ? 1.0 : 0.0});
      }
      io::write_table(out_path(tune_c, "path.csv"), path, prov);
      io::write_coefficients(out_path(tune_c, "coefficients.csv"), res.best().params, prov);
      io::write_curves_matrix(out_path(tune_c, "beta.csv"), reconstruct_betas(res.best().params, filter), prov);
      write_json(out_path(tune_c, "selection.json"),
                 {{"config", resolved},
                  {"selected", res.selected},
                  {"selected_gic", res.selected_gic},
                  {"selected_validation", res.selected_validation},
                  {"lambda1", res.lambda1()},
                  {"lambda2", res.lambda2()},
                  {"fit", fit_json(res.best())}});
      out << "selected " << res.selected << "\nlambda1 " << io::format_double(res.lambda1()) << "\nlambda2 "
          << io::format_double(res.lambda2()) << '\n';
      return warn_or_fail(res.best().converged, tune_c.strict, "selected fit", err);
    }

    if (ev_cmd->parsed()) {
      const MatrixXd truth_beta = io::read_curves_matrix(ev_truth_beta);
      const Index m = truth_beta.rows();
      const Index N = truth_beta.cols();
      const CoefficientSet est = io::read_coefficients(ev_coef, m, N);
      const WaveletFilter filter = WaveletFilter::from_name(ev_c.filter);
      const MatrixXd beta_hat = reconstruct_betas(est, filter);
      const IntegratedErrors e = mise_ise(beta_hat, truth_beta);
      std::vector<Index> est_support;
      for (Index l = 0; l < m; ++l) {
        if (est.block(l).cwiseAbs().maxCoeff() > 0.0) est_support.push_back(l);
      }
      json metrics = {{"mise", e.mise}, {"ise", std::vector<double>(e.ise.data(), e.ise.data() + e.ise.size())}};
      std::vector<Index> truth_support;
      if (!ev_truth_coef.empty()) {
        const CoefficientSet truth = io::read_coefficients(ev_truth_coef, m, N);
        for (Index l = 0; l < m; ++l) {
          if (truth.block(l).cwiseAbs().maxCoeff() > 0.0) truth_support.push_back(l);
        }
        metrics["va"] = variable_accuracy(est.theta, truth.theta);
      } else {
        for (Index l = 0; l < m; ++l) {
          if (truth_beta.row(l).cwiseAbs().maxCoeff() > 0.0) truth_support.push_back(l);
        }
      }
      metrics["ga"] = group_accuracy(est_support, truth_support, m);
      metrics["estimated_support"] = est_support;
      metrics["true_support"] = truth_support;
      const bool have_data = !ev_d.curves.empty() || !ev_d.response.empty();
      if (have_data) {
        if (ev_d.curves.empty() || ev_d.response.empty()) {
          throw UsageError("--curves and --response must be given together");
        }
        const Dataset data = load_data(ev_d);
        const QuantileLevels taus = ev_l.resolve();
        if (est.alpha.size() != taus.size()) {
          throw DimensionError("coefficients hold " + std::to_string(est.alpha.size()) + " intercepts but " +
                               std::to_string(taus.size()) + " quantile levels were given");
        }
        const Design design = build_design(data, filter);
        check_dimensions(est, design, taus.size());
        Index k = 0;
        for (Index j = 1; j < taus.size(); ++j) {
          if (std::abs(taus[j] - 0.5) < std::abs(taus[k] - 0.5)) k = j;
        }
        metrics["mape"] = mape(predict_quantile(est, design, k), data.response);
      }
      json resolved = {{"coefficients", ev_coef}, {"truth_beta", ev_truth_beta},
                       {"truth_coefficients", ev_truth_coef}, {"filter", ev_c.filter}};
      write_json(out_path(ev_c, "metrics.json"), {{"config", resolved}, {"metrics", metrics}});
      out << "mise " << io::format_double(e.mise) << '\n';
      return kOk;
    }

    if (so_cmd->parsed()) {
      so_pen.validate();
      const Dataset data = load_data(so_d);
      const QuantileLevels taus = so_l.resolve();
      const WaveletFilter filter = WaveletFilter::from_name(so_c.filter);
      const Design design = build_design(data, filter);
      const ConicProblem pr = build_socp(design, data.response, taus, so_pen);
      export_socp(pr, out_path(so_c, so_out));
      json resolved = {{"data", data_json(so_d)}, {"taus", taus.values()}, {"filter", so_c.filter},
                       {"lambda1", so_pen.lambda1}, {"lambda2", so_pen.lambda2}};
      write_json(out_path(so_c, so_out + ".json"),
                 {{"config", resolved}, {"num_vars", pr.num_vars}, {"rows", pr.rows.size()}, {"cones", pr.cones.size()}});
      out << "num_vars " << pr.num_vars << "\nrows " << pr.rows.size() << "\ncones " << pr.cones.size() << '\n';
      return kOk;
    }

    if (st_cmd->parsed()) {
      st_s.validate();
      const Dataset data = load_data(st_d);
      const QuantileLevels taus = st_l.resolve();
      const WaveletFilter filter = WaveletFilter::from_name(st_c.filter);
      st_cfg.method = method_from_name(st_method);
      st_cfg.threads = resolve_threads(st_c.threads);
      const StabilityReport rep = stability_select(data, taus, st_cfg, st_s, filter);
      json resolved = {{"data", data_json(st_d)},
                       {"taus", taus.values()},
                       {"filter", st_c.filter},
                       {"bootstraps", st_cfg.bootstraps},
                       {"threshold", st_cfg.norm_threshold},
                       {"seed", st_cfg.seed},
                       {"method", std::string(method_name(st_cfg.method))},
                       {"ratio", st_cfg.ratio},
                       {"grid_size", st_cfg.grid_size},
                       {"grid_min", st_cfg.grid_min_fraction},
                       {"solver", solver_json(st_s)}};
      const std::string prov = provenance("stability-select", resolved);
      io::Table box;
      box.header = {"predictor", "min", "q1", "median", "q3", "max", "selected"};
      for (Index l = 0; l < data.m; ++l) {
        const auto& s = rep.summaries[static_cast<std::size_t>(l)];
        const bool sel = std::find(rep.selected.begin(), rep.selected.end(), l) != rep.selected.end();
        box.rows.push_back({static_cast<double>(l), s[0], s[1], s[2], s[3], s[4], sel ? 1.0 : 0.0});
      }
      io::write_table(out_path(st_c, "boxplot.csv"), box, prov);
      io::Table norms;
      norms.header = {"bootstrap", "degenerate"};
      for (Index l = 0; l < data.m; ++l) norms.header.push_back("norm" + std::to_string(l));
      for (Index b = 0; b < rep.norms.rows(); ++b) {
        std::vector<double> row{static_cast<double>(b), rep.degenerate[static_cast<std::size_t>(b)] ? 1.0 : 0.0};
        for (Index l = 0; l < data.m; ++l) row.push_back(rep.norms(b, l));
        norms.rows.push_back(std::move(row));
      }
      io::write_table(out_path(st_c, "norms.csv"), norms, prov);
      write_json(out_path(st_c, "selection.json"),
                 {{"config", resolved},
                  {"selected", rep.selected},
                  {"median_norms", std::vector<double>(rep.median_norms.data(),
                                                       rep.median_norms.data() + rep.median_norms.size())},
                  {"degenerate_bootstraps", rep.degenerate_count()}});
      out << "selected";
      for (Index l : rep.selected) out << ' ' << l;
      out << "\ndegenerate_bootstraps " << rep.degenerate_count() << '\n';
      return kOk;
    }

    if (t1_cmd->parsed()) {
      rp_cfg.noise = sim::noise_from_name(rp_noise);
      if (rp_method == "all") {
        rp_cfg.methods = {Method::qSGL, Method::qL, Method::qGL};
      } else {
        rp_cfg.methods = {method_from_name(rp_method)};
      }
      std::vector<Criterion> crits;
      if (rp_crit == "all") {
        crits = {Criterion::validation, Criterion::gic};
      } else {
        crits = {criterion_from_name(rp_crit)};
      }
      rp_cfg.threads = resolve_threads(rp_c.threads);
      const auto all = run_experiment(rp_cfg);
      std::vector<ReplicateResult> results;
      for (const auto& r : all) {
        if (std::find(crits.begin(), crits.end(), r.criterion) != crits.end()) results.push_back(r);
      }
      const auto rows = aggregate(results);
      std::ostringstream agg;
      write_aggregate_csv(agg, rows);
      if (!rp_c.out_dir.empty()) {
        json resolved = {{"n", rp_cfg.n},
                         {"noise", std::string(sim::noise_name(rp_cfg.noise))},
                         {"snr", rp_cfg.snr},
                         {"reps", rp_cfg.reps},
                         {"seed", rp_cfg.seed},
                         {"method", rp_method},
                         {"criterion", rp_crit},
                         {"taus", rp_cfg.taus},
                         {"ratio", rp_cfg.ratio},
                         {"grid_size", rp_cfg.grid_size},
                         {"grid_min", rp_cfg.grid_min_fraction},
                         {"grid_len", rp_cfg.grid_len},
                         {"filter", rp_cfg.filter},
                         {"solver", solver_json(rp_cfg.solver)}};
        const std::string prov = provenance("reproduce table1-row", resolved);
        std::ostringstream reps;
        write_replicates_csv(reps, results);
        std::ostringstream header;
        {
          std::istringstream lines(prov);
          std::string line;
          while (std::getline(lines, line)) header << "# " << line << '\n';
        }
        io::write_text(out_path(rp_c, "aggregate.csv"), header.str() + agg.str());
        io::write_text(out_path(rp_c, "replicates.csv"), header.str() + reps.str());
        write_json(out_path(rp_c, "reproduce.json"), {{"config", resolved}, {"threads", rp_cfg.threads}});
      }
      out << agg.str();
      bool all_converged = true;
      for (const auto& r : results) all_converged = all_converged && r.converged;
      return warn_or_fail(all_converged, rp_c.strict, "some selected fits", err);
    }
  } catch (const UsageError& e) {
    err << "wavecqr: error[usage]: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    err << "wavecqr: error[usage]: " << e.what() << '\n';
    return kUsage;
  } catch (const DimensionError& e) {
    err << "wavecqr: error[data]: " << e.what() << '\n';
    return kData;
  } catch (const DataError& e) {
    err << "wavecqr: error[data]: " << e.what() << '\n';
    return kData;
  } catch (const SolverError& e) {
    err << "wavecqr: error[data]: " << e.what() << '\n';
    return kData;
  }
  err << "wavecqr: error[usage]: no subcommand\n";
  return kUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace wavecqr::cli
