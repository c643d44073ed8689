#include "wavecqr/experiment.hpp"

#include "wavecqr/errors.hpp"
#include "wavecqr/io.hpp"
#include "wavecqr/metrics.hpp"
#include "wavecqr/parallel.hpp"
#include "wavecqr/random.hpp"
#include "wavecqr/stability.hpp"

#include <cmath>
#include <ostream>

namespace wavecqr {

void ExperimentConfig::validate() const {
  if (n < 3) throw ParameterError("experiment needs n >= 3");
  if (reps < 1) throw ParameterError("experiment needs at least one replicate");
  if (methods.empty()) throw ParameterError("experiment needs at least one method");
  if (grid_size < 1) throw ParameterError("grid size must be positive");
  solver.validate();
  QuantileLevels check(taus);
  (void)check;
}

namespace {

Index median_level(const QuantileLevels& taus) {
  Index best = 0;
  for (Index k = 1; k < taus.size(); ++k) {
    if (std::abs(taus[k] - 0.5) < std::abs(taus[best] - 0.5)) best = k;
  }
  return best;
}

ReplicateResult evaluate_fit(const FitResult& fit, const Design& test, const VectorXd& y_test,
                             const sim::SimulatedDataset& sim, const WaveletFilter& filter, const QuantileLevels& taus) {
  ReplicateResult r;
  const MatrixXd betas = reconstruct_betas(fit.params, filter);
  const IntegratedErrors err = mise_ise(betas, sim.beta_true);
  r.mise = err.mise;
  r.ise = err.ise;
  r.mape = mape(predict_quantile(fit.params, test, median_level(taus)), y_test);
  const auto blocks = fit.support_blocks();
  r.ga = group_accuracy(blocks, sim.true_support(), sim.data.m);
  r.va = variable_accuracy(fit.params.theta, sim.theta_true_flat());
  r.support_groups = static_cast<Index>(blocks.size());
  r.converged = fit.converged;
  r.sigma = sim.sigma;
  return r;
}

}  // namespace

std::vector<ReplicateResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const QuantileLevels taus(cfg.taus);
  const WaveletFilter filter = WaveletFilter::from_name(cfg.filter);
  const std::size_t per_rep = cfg.methods.size() * 2;
  std::vector<ReplicateResult> out(static_cast<std::size_t>(cfg.reps) * per_rep);

  parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t rep) {
    sim::SimConfig sc;
    sc.n = 12 * cfg.n;
    sc.snr = cfg.snr;
    sc.noise = cfg.noise;
    sc.seed = derive_seed(cfg.seed, rep);
    sc.grid_len = cfg.grid_len;
    sc.filter = cfg.filter;
    const sim::SimulatedDataset sim = sim::gen_dataset(sc);

    const Dataset train = sim.data.rows(0, cfg.n);
    const Dataset tune = sim.data.rows(cfg.n, 2 * cfg.n);
    const Dataset test = sim.data.rows(2 * cfg.n, 12 * cfg.n);
    const Design d_train = build_design(train, filter);
    const Design d_tune = build_design(tune, filter);
    const Design d_test = build_design(test, filter);

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const Method method = cfg.methods[mi];
      TuningGrid grid;
      grid.method = method;
      grid.ratio = cfg.ratio;
      grid.values = log_spaced_path(lambda_max(d_train, train.response, taus, method, cfg.ratio), cfg.grid_size,
                                    cfg.grid_min_fraction);
      const double phi = phi_n_default(d_train.n(), d_train.p(), method);
      const GridSearchResult res =
          grid_search(d_train, train.response, d_tune, tune.response, grid, taus, cfg.solver, phi);
      int unconverged = 0;
      for (const auto& f : res.fits) {
        if (!f.converged) ++unconverged;
        if (cfg.fit_observer) cfg.fit_observer(static_cast<int>(rep), method, f);
      }
      const std::size_t choice[2] = {res.selected_validation, res.selected_gic};
      const Criterion crit[2] = {Criterion::validation, Criterion::gic};
      for (int c = 0; c < 2; ++c) {
        ReplicateResult r = evaluate_fit(res.fits[choice[c]], d_test, test.response, sim, filter, taus);
        r.rep = static_cast<int>(rep);
        r.seed = sc.seed;
        r.method = method;
        r.criterion = crit[c];
        r.lambda1 = res.path[choice[c]].lambda1;
        r.lambda2 = res.path[choice[c]].lambda2;
        r.unconverged_fits = unconverged;
        out[rep * per_rep + mi * 2 + static_cast<std::size_t>(c)] = std::move(r);
      }
    }
  });
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<ReplicateResult>& results) {
  std::vector<AggregateRow> rows;
  auto find = [&](Method m, Criterion c) -> AggregateRow* {
    for (auto& r : rows) {
      if (r.method == m && r.criterion == c) return &r;
    }
    return nullptr;
  };
  for (const auto& r : results) {
    if (!find(r.method, r.criterion)) {
      AggregateRow row;
      row.method = r.method;
      row.criterion = r.criterion;
      rows.push_back(row);
    }
  }
  for (auto& row : rows) {
    std::vector<double> mise, mape_v, ga, va, ise_sum;
    std::vector<std::vector<double>> ise;
    for (const auto& r : results) {
      if (r.method != row.method || r.criterion != row.criterion) continue;
      mise.push_back(r.mise);
      mape_v.push_back(r.mape);
      ga.push_back(r.ga);
      va.push_back(r.va);
      ise_sum.push_back(r.ise.sum());
      if (ise.empty()) ise.resize(static_cast<std::size_t>(r.ise.size()));
      for (Index l = 0; l < r.ise.size(); ++l) ise[static_cast<std::size_t>(l)].push_back(r.ise(l));
      if (!r.converged) ++row.unconverged;
    }
    row.reps = static_cast<int>(mise.size());
    auto med_iqr = [](const std::vector<double>& v, double& med, double& iqr) {
      med = sample_quantile(v, 0.5);
      iqr = sample_quantile(v, 0.75) - sample_quantile(v, 0.25);
    };
    med_iqr(mise, row.mise_median, row.mise_iqr);
    med_iqr(mape_v, row.mape_median, row.mape_iqr);
    med_iqr(ga, row.ga_median, row.ga_iqr);
    med_iqr(va, row.va_median, row.va_iqr);
    row.ise_sum_median = sample_quantile(ise_sum, 0.5);
    row.ise_median.resize(static_cast<Index>(ise.size()));
    for (std::size_t l = 0; l < ise.size(); ++l) row.ise_median(static_cast<Index>(l)) = sample_quantile(ise[l], 0.5);
  }
  return rows;
}

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateResult>& results) {
  out << "rep,seed,method,criterion,lambda1,lambda2,mise,mape,ga,va,support_groups,converged,unconverged_fits,sigma";
  const Index m = results.empty() ? 0 : results.front().ise.size();
  for (Index l = 0; l < m; ++l) out << ",ise" << l + 1;
  out << '\n';
  for (const auto& r : results) {
    out << r.rep << ',' << r.seed << ',' << method_name(r.method) << ',' << criterion_name(r.criterion) << ','
        << io::format_double(r.lambda1) << ',' << io::format_double(r.lambda2) << ',' << io::format_double(r.mise)
        << ',' << io::format_double(r.mape) << ',' << io::format_double(r.ga) << ',' << io::format_double(r.va) << ','
        << r.support_groups << ',' << (r.converged ? 1 : 0) << ',' << r.unconverged_fits << ','
        << io::format_double(r.sigma);
    for (Index l = 0; l < r.ise.size(); ++l) out << ',' << io::format_double(r.ise(l));
    out << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "method,criterion,reps,mise_median,mise_iqr,mape_median,mape_iqr,ga_median,ga_iqr,va_median,va_iqr,"
         "ise_sum_median,unconverged";
  const Index m = rows.empty() ? 0 : rows.front().ise_median.size();
  for (Index l = 0; l < m; ++l) out << ",ise" << l + 1 << "_median";
  out << '\n';
  for (const auto& r : rows) {
    out << method_name(r.method) << ',' << criterion_name(r.criterion) << ',' << r.reps << ','
        << io::format_double(r.mise_median) << ',' << io::format_double(r.mise_iqr) << ','
        << io::format_double(r.mape_median) << ',' << io::format_double(r.mape_iqr) << ','
        << io::format_double(r.ga_median) << ',' << io::format_double(r.ga_iqr) << ','
        << io::format_double(r.va_median) << ',' << io::format_double(r.va_iqr) << ','
        << io::format_double(r.ise_sum_median) << ',' << r.unconverged;
    for (Index l = 0; l < r.ise_median.size(); ++l) out << ',' << io::format_double(r.ise_median(l));
    out << '\n';
  }
}

}  // namespace wavecqr
