#include "wavecqr/tuning.hpp"

#include "wavecqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wavecqr {

Method method_from_name(std::string_view name) {
  if (name == "qSGL" || name == "sgl") return Method::qSGL;
  if (name == "qL" || name == "lasso") return Method::qL;
  if (name == "qGL" || name == "gl") return Method::qGL;
  throw ParameterError("unknown method '" + std::string(name) + "' (expected qSGL, qL or qGL)");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::qSGL: return "qSGL";
    case Method::qL: return "qL";
    case Method::qGL: return "qGL";
  }
  return "qSGL";
}

Criterion criterion_from_name(std::string_view name) {
  if (name == "gic") return Criterion::gic;
  if (name == "validation" || name == "gs") return Criterion::validation;
  throw ParameterError("unknown criterion '" + std::string(name) + "' (expected gic or validation)");
}

std::string_view criterion_name(Criterion criterion) {
  return criterion == Criterion::gic ? "gic" : "validation";
}

PenaltySpec penalty_for(Method method, double scale, double ratio) {
  switch (method) {
    case Method::qSGL: return {ratio * scale, scale};
    case Method::qL: return {scale, 0.0};
    case Method::qGL: return {0.0, scale};
  }
  return {};
}

void TuningGrid::validate() const {
  if (values.empty()) throw ParameterError("tuning grid is empty");
  if (!(ratio >= 0.0)) throw ParameterError("tuning ratio must be nonnegative");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw ParameterError("grid values must be positive");
    if (i > 0 && !(values[i] < values[i - 1])) throw ParameterError("grid values must be strictly descending");
  }
}

std::vector<double> log_spaced_path(double lambda_max, int count, double min_fraction) {
  if (!(lambda_max > 0.0)) throw DataError("lambda_max is not positive; the response carries no signal to fit");
  if (count < 1 || !(min_fraction > 0.0 && min_fraction <= 1.0)) throw ParameterError("invalid path shape");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) return {lambda_max};
  const double log_hi = std::log(lambda_max);
  const double log_lo = std::log(lambda_max * min_fraction);
  for (int i = 0; i < count; ++i) {
    out.push_back(std::exp(log_hi + (log_lo - log_hi) * i / (count - 1)));
  }
  return out;
}

double mean_check_loss(const CoefficientSet& params, const Design& design, const VectorXd& y,
                       const QuantileLevels& taus) {
  double total = 0.0;
  for (Index k = 0; k < taus.size(); ++k) {
    const VectorXd yhat = predict_quantile(params, design, k);
    double level = 0.0;
    for (Index i = 0; i < y.size(); ++i) level += check_loss(y(i) - yhat(i), taus[k]);
    total += level / static_cast<double>(y.size());
  }
  return total / static_cast<double>(taus.size());
}

GicScore gic(const FitResult& fit, const Design& design, const VectorXd& y, const QuantileLevels& taus,
             double phi_n) {
  if (!(phi_n > 0.0)) throw ParameterError("phi_n must be positive");
  if (y.size() != design.n()) throw DimensionError("response length differs from design rows");
  GicScore out;
  double log_sum = 0.0;
  for (Index k = 0; k < taus.size(); ++k) {
    const VectorXd yhat = predict_quantile(fit.params, design, k);
    double loss = 0.0;
    for (Index i = 0; i < y.size(); ++i) loss += check_loss(y(i) - yhat(i), taus[k]);
    loss /= static_cast<double>(y.size());
    if (!(loss > 0.0)) {
      out.degenerate = true;
      out.value = -std::numeric_limits<double>::infinity();
      return out;
    }
    log_sum += std::log(loss);
  }
  out.value = log_sum / static_cast<double>(taus.size()) + phi_n * static_cast<double>(fit.support_size());
  return out;
}

double phi_n_default(Index n, Index p, Method method) {
  if (n < 3 || p < 3) throw ParameterError("phi_n needs n >= 3 and p >= 3");
  const double dn = static_cast<double>(n);
  const double pn = std::log(std::log(dn)) * std::log(std::log(static_cast<double>(p))) / (10.0 * dn);
  return method == Method::qGL ? pn : 5.0 * pn;
}

double lambda_max(const Design& design, const VectorXd& y, const QuantileLevels& taus, Method method,
                  double ratio) {
  if (y.size() != design.n()) throw DimensionError("response length differs from design rows");
  const Index n = design.n();
  const Index K = taus.size();
  const Index P = design.theta_size();
  const Index N = design.grid_len;
  if (P == 0) return 0.0;

  // Intercept/scalar-only fit.
  Design null_design;
  null_design.m = 0;
  null_design.grid_len = N;
  null_design.q = design.q;
  null_design.rows.resize(n, 1 + design.q);
  null_design.rows.col(0).setOnes();
  if (design.q > 0) null_design.rows.rightCols(design.q) = design.scalar_block();
  SolverConfig cfg;
  cfg.inner_eps_abs = 1e-9;
  cfg.inner_eps_rel = 1e-8;
  cfg.max_inner = 500;
  cfg.max_outer = 200;
  const FitResult null_fit = fit(null_design, y, taus, PenaltySpec{}, cfg);

  const double zero_tol = 1e-7 * (1.0 + y.cwiseAbs().maxCoeff());
  VectorXd shared = VectorXd::Zero(n);
  if (design.q > 0) shared = design.scalar_block() * null_fit.params.gamma;
  VectorXd fixed_weight = VectorXd::Zero(n);  // summed subgradient of settled residuals
  VectorXd free_weight = VectorXd::Zero(n);   // largest |subgradient| of vanishing residuals
  for (Index k = 0; k < K; ++k) {
    const double tau = taus[k];
    for (Index i = 0; i < n; ++i) {
      const double r = y(i) - null_fit.params.alpha(k) - shared(i);
      if (r > zero_tol) {
        fixed_weight(i) += tau;
      } else if (r < -zero_tol) {
        fixed_weight(i) += tau - 1.0;
      } else {
        free_weight(i) += std::max(tau, 1.0 - tau);
      }
    }
  }
  const auto v = design.wavelet_block();
  const VectorXd bound = (v.transpose() * fixed_weight).cwiseAbs() + v.cwiseAbs().transpose() * free_weight;

  switch (method) {
    case Method::qL: return bound.maxCoeff();
    case Method::qGL: {
      double best = 0.0;
      for (Index l = 0; l < design.m; ++l) best = std::max(best, bound.segment(l * N, N).norm());
      return best;
    }
    case Method::qSGL: break;
  }

  // Smallest s with ||(bound_l - ratio*s)_+|| <= s for every block.
  auto feasible = [&](double s) {
    for (Index l = 0; l < design.m; ++l) {
      const double norm = (bound.segment(l * N, N).array() - ratio * s).max(0.0).matrix().norm();
      if (norm > s) return false;
    }
    return true;
  };
  double hi = 0.0;
  for (Index l = 0; l < design.m; ++l) hi = std::max(hi, bound.segment(l * N, N).norm());
  if (hi <= 0.0) return 0.0;
  double lo = 0.0;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

double lambda_max(const Design& design, const VectorXd& y, const QuantileLevels& taus, double ratio) {
  return lambda_max(design, y, taus, Method::qSGL, ratio);
}

GridSearchResult grid_search(const Design& train, const VectorXd& y_train, const Design& tune,
                             const VectorXd& y_tune, const TuningGrid& grid, const QuantileLevels& taus,
                             const SolverConfig& cfg, double phi_n) {
  grid.validate();
  if (train.m != tune.m || train.grid_len != tune.grid_len || train.q != tune.q) {
    throw DimensionError("training and tuning data differ in m, N or q");
  }
  AdmmSolver solver(train, y_train, taus, cfg);
  GridSearchResult out;
  out.path.reserve(grid.values.size());
  out.fits.reserve(grid.values.size());
  for (std::size_t g = 0; g < grid.values.size(); ++g) {
    const PenaltySpec pen = penalty_for(grid.method, grid.values[g], grid.ratio);
    FitResult f = solver.fit(pen, g > 0 ? &out.fits.back() : nullptr);
    PathPoint pt;
    pt.lambda1 = pen.lambda1;
    pt.lambda2 = pen.lambda2;
    pt.gic = gic(f, train, y_train, taus, phi_n);
    pt.tune_loss = mean_check_loss(f.params, tune, y_tune, taus);
    pt.support_size = f.support_size();
    pt.support_groups = static_cast<Index>(f.support_blocks().size());
    pt.outer_iters = f.outer_iters;
    pt.converged = f.converged;
    out.path.push_back(pt);
    out.fits.push_back(std::move(f));
  }
  for (std::size_t g = 1; g < out.path.size(); ++g) {
    if (out.path[g].gic.value < out.path[out.selected_gic].gic.value) out.selected_gic = g;
    if (out.path[g].tune_loss < out.path[out.selected_validation].tune_loss) out.selected_validation = g;
  }
  out.selected = grid.criterion == Criterion::gic ? out.selected_gic : out.selected_validation;
  return out;
}

GridSearchResult grid_search(const Dataset& train, const Dataset& tune, const TuningGrid& grid,
                             const QuantileLevels& taus, const SolverConfig& cfg, const WaveletFilter& filter) {
  const Design d_train = build_design(train, filter);
  const Design d_tune = build_design(tune, filter);
  const double phi = phi_n_default(d_train.n(), d_train.p(), grid.method);
  return grid_search(d_train, train.response, d_tune, tune.response, grid, taus, cfg, phi);
}

}  // namespace wavecqr
