#include "wavecqr/model.hpp"

#include "wavecqr/errors.hpp"

#include <cmath>
#include <string>

namespace wavecqr {

void Dataset::validate() const {
  const Index n_rows = n();
  if (n_rows < 1) throw DimensionError("dataset has no samples");
  if (curves.rows() != n_rows || scalars.rows() != n_rows) {
    throw DimensionError("curves, scalars and response disagree on the number of samples");
  }
  if (m < 0 || curves.cols() != m * grid_len) {
    throw DimensionError("curve matrix must have m*N columns");
  }
  if (m > 0) dyadic_exponent(static_cast<std::size_t>(grid_len));
  if (!curves.allFinite() || !scalars.allFinite() || !response.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
}

Dataset Dataset::subset(const std::vector<Index>& idx) const {
  Dataset out;
  out.m = m;
  out.grid_len = grid_len;
  const Index count = static_cast<Index>(idx.size());
  out.curves.resize(count, curves.cols());
  out.scalars.resize(count, scalars.cols());
  out.response.resize(count);
  for (Index r = 0; r < count; ++r) {
    const Index src = idx[static_cast<std::size_t>(r)];
    out.curves.row(r) = curves.row(src);
    out.scalars.row(r) = scalars.row(src);
    out.response(r) = response(src);
  }
  return out;
}

Dataset Dataset::rows(Index begin, Index end) const {
  Dataset out;
  out.m = m;
  out.grid_len = grid_len;
  out.curves = curves.middleRows(begin, end - begin);
  out.scalars = scalars.middleRows(begin, end - begin);
  out.response = response.segment(begin, end - begin);
  return out;
}

QuantileLevels::QuantileLevels(std::vector<double> taus) : taus_(std::move(taus)) {
  if (taus_.empty()) throw ParameterError("at least one quantile level is required");
  for (std::size_t k = 0; k < taus_.size(); ++k) {
    if (!(taus_[k] > 0.0 && taus_[k] < 1.0)) {
      throw ParameterError("quantile level " + std::to_string(taus_[k]) + " not in (0,1)");
    }
    if (k > 0 && !(taus_[k] > taus_[k - 1])) {
      throw ParameterError("quantile levels must be strictly increasing");
    }
  }
}

QuantileLevels QuantileLevels::equally_spaced(int count) {
  if (count < 1) throw ParameterError("need at least one quantile level");
  std::vector<double> taus;
  for (int k = 1; k <= count; ++k) taus.push_back(static_cast<double>(k) / (count + 1));
  return QuantileLevels(std::move(taus));
}

CoefficientSet CoefficientSet::zeros(Index K, Index q, Index m, Index grid_len) {
  CoefficientSet c;
  c.alpha = VectorXd::Zero(K);
  c.gamma = VectorXd::Zero(q);
  c.theta = VectorXd::Zero(m * grid_len);
  c.m = m;
  c.grid_len = grid_len;
  return c;
}

void PenaltySpec::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
    throw ParameterError("penalty parameters must be finite and nonnegative");
  }
}

Design build_design(const Dataset& data, const WaveletFilter& filter) {
  data.validate();
  const Index n = data.n();
  const Index m = data.m;
  const Index N = data.grid_len;
  const Index q = data.q();
  Design d;
  d.m = m;
  d.grid_len = N;
  d.q = q;
  d.rows.resize(n, 1 + m * N + q);
  d.rows.col(0).setOnes();
  const double inv_n = m > 0 ? 1.0 / static_cast<double>(N) : 0.0;
  std::vector<double> buf(static_cast<std::size_t>(N));
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < m; ++l) {
      for (Index j = 0; j < N; ++j) buf[static_cast<std::size_t>(j)] = data.curves(i, l * N + j);
      d.rows.block(i, 1 + l * N, 1, N) = dwt(buf, filter).values.transpose() * inv_n;
    }
  }
  if (q > 0) d.rows.rightCols(q) = data.scalars;
  return d;
}

void standardize_scalars(Dataset& data) {
  const Index n = data.n();
  if (n < 2) return;
  for (Index c = 0; c < data.q(); ++c) {
    auto col = data.scalars.col(c);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (var > 0.0) col /= std::sqrt(var);
  }
}

double check_loss(double r, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("check loss needs tau in (0,1)");
  return r < 0.0 ? r * (tau - 1.0) : r * tau;
}

double sgl_penalty(const VectorXd& theta, Index grid_len, const PenaltySpec& pen) {
  if (theta.size() == 0) return 0.0;
  if (grid_len <= 0 || theta.size() % grid_len != 0) {
    throw DimensionError("theta length is not a multiple of the block length");
  }
  double l1 = 0.0;
  double l2 = 0.0;
  for (Index start = 0; start < theta.size(); start += grid_len) {
    const auto b = theta.segment(start, grid_len);
    l1 += b.lpNorm<1>();
    l2 += b.norm();
  }
  return pen.lambda1 * l1 + pen.lambda2 * l2;
}

void check_dimensions(const CoefficientSet& params, const Design& design, Index K) {
  if (params.alpha.size() != K) throw DimensionError("intercept count differs from number of levels");
  if (params.gamma.size() != design.q) throw DimensionError("gamma length differs from scalar columns");
  if (params.theta.size() != design.theta_size()) {
    throw DimensionError("theta length differs from m*N of the design");
  }
}

VectorXd predict_quantile(const CoefficientSet& params, const Design& design, Index k) {
  if (k < 0 || k >= params.alpha.size()) throw DimensionError("quantile level index out of range");
  if (params.gamma.size() != design.q || params.theta.size() != design.theta_size()) {
    throw DimensionError("coefficients do not match the design");
  }
  VectorXd yhat = VectorXd::Constant(design.n(), params.alpha(k));
  if (design.theta_size() > 0) yhat.noalias() += design.wavelet_block() * params.theta;
  if (design.q > 0) yhat.noalias() += design.scalar_block() * params.gamma;
  return yhat;
}

double composite_loss(const CoefficientSet& params, const Design& design, const VectorXd& y,
                      const QuantileLevels& taus) {
  check_dimensions(params, design, taus.size());
  if (y.size() != design.n()) throw DimensionError("response length differs from design rows");
  VectorXd shared = VectorXd::Zero(design.n());
  if (design.theta_size() > 0) shared.noalias() += design.wavelet_block() * params.theta;
  if (design.q > 0) shared.noalias() += design.scalar_block() * params.gamma;
  double total = 0.0;
  for (Index k = 0; k < taus.size(); ++k) {
    for (Index i = 0; i < design.n(); ++i) {
      total += check_loss(y(i) - params.alpha(k) - shared(i), taus[k]);
    }
  }
  return total;
}

double objective(const CoefficientSet& params, const Design& design, const VectorXd& y,
                 const QuantileLevels& taus, const PenaltySpec& pen) {
  pen.validate();
  return composite_loss(params, design, y, taus) + sgl_penalty(params.theta, design.grid_len, pen);
}

VectorXd reconstruct_beta(const VectorXd& theta_block, const WaveletFilter& filter) {
  WaveletCoeffs c;
  c.values = theta_block;
  c.levels = dyadic_exponent(static_cast<std::size_t>(theta_block.size()));
  return idwt(c, filter);
}

MatrixXd reconstruct_betas(const CoefficientSet& params, const WaveletFilter& filter) {
  MatrixXd out(params.m, params.grid_len);
  for (Index l = 0; l < params.m; ++l) {
    out.row(l) = reconstruct_beta(params.block(l), filter).transpose();
  }
  return out;
}

}  // namespace wavecqr
