#include "wavecqr/stability.hpp"

#include "wavecqr/errors.hpp"
#include "wavecqr/metrics.hpp"
#include "wavecqr/parallel.hpp"
#include "wavecqr/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavecqr {

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

FiveNumber five_number_summary(const std::vector<double>& values) {
  return {sample_quantile(values, 0.0), sample_quantile(values, 0.25), sample_quantile(values, 0.5),
          sample_quantile(values, 0.75), sample_quantile(values, 1.0)};
}

int StabilityReport::degenerate_count() const {
  return static_cast<int>(std::count(degenerate.begin(), degenerate.end(), true));
}

StabilityReport stability_select(const Dataset& data, const QuantileLevels& taus, const StabilityConfig& cfg,
                                 const SolverConfig& solver, const WaveletFilter& filter) {
  if (cfg.bootstraps < 1) throw ParameterError("stability selection needs at least one bootstrap");
  data.validate();
  const Index n = data.n();
  const Index m = data.m;
  const auto B = static_cast<std::size_t>(cfg.bootstraps);

  StabilityReport report;
  report.norms = MatrixXd::Constant(cfg.bootstraps, m, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> degenerate(B, 0);

  parallel_for(B, cfg.threads, [&](std::size_t b) {
    Rng rng(derive_seed(cfg.seed, b));
    std::uniform_int_distribution<Index> pick(0, n - 1);
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (auto& i : idx) i = pick(rng);
    const Dataset sample = data.subset(idx);
    // An iterative fit never reaches exactly zero loss, so a constant
    // response is caught here rather than through the GIC score.
    if (sample.response.maxCoeff() == sample.response.minCoeff()) {
      degenerate[b] = 1;
      return;
    }
    try {
      const Design design = build_design(sample, filter);
      TuningGrid grid;
      grid.method = cfg.method;
      grid.ratio = cfg.ratio;
      grid.criterion = Criterion::gic;
      grid.values = log_spaced_path(lambda_max(design, sample.response, taus, cfg.method, cfg.ratio),
                                    cfg.grid_size, cfg.grid_min_fraction);
      const double phi = phi_n_default(design.n(), design.p(), cfg.method);
      const GridSearchResult res =
          grid_search(design, sample.response, design, sample.response, grid, taus, solver, phi);
      if (res.path[res.selected].gic.degenerate) {
        degenerate[b] = 1;
        return;
      }
      const MatrixXd betas = reconstruct_betas(res.best().params, filter);
      report.norms.row(static_cast<Index>(b)) = function_norms(betas).transpose();
    } catch (const DataError&) {
      degenerate[b] = 1;
    } catch (const SolverError&) {
      degenerate[b] = 1;
    }
  });

  report.degenerate.assign(degenerate.begin(), degenerate.end());
  report.median_norms.resize(m);
  report.summaries.resize(static_cast<std::size_t>(m));
  for (Index l = 0; l < m; ++l) {
    std::vector<double> col;
    for (std::size_t b = 0; b < B; ++b) {
      if (!degenerate[b]) col.push_back(report.norms(static_cast<Index>(b), l));
    }
    report.summaries[static_cast<std::size_t>(l)] = five_number_summary(col);
    report.median_norms(l) = sample_quantile(col, 0.5);
    if (report.median_norms(l) > cfg.norm_threshold) report.selected.push_back(l);
  }
  return report;
}

}  // namespace wavecqr
