#include "wavecqr/metrics.hpp"

#include "wavecqr/errors.hpp"

#include <cmath>

namespace wavecqr {

namespace {

std::vector<bool> indicator(const std::vector<Index>& support, Index m) {
  std::vector<bool> mask(static_cast<std::size_t>(m), false);
  for (Index l : support) {
    if (l < 0 || l >= m) throw DimensionError("support index outside [0, m)");
    mask[static_cast<std::size_t>(l)] = true;
  }
  return mask;
}

}  // namespace

double group_accuracy(const std::vector<Index>& estimated, const std::vector<Index>& truth, Index m) {
  if (m < 1) throw DimensionError("group accuracy needs m >= 1");
  const auto est = indicator(estimated, m);
  const auto tru = indicator(truth, m);
  Index agree = 0;
  for (std::size_t l = 0; l < est.size(); ++l) agree += est[l] == tru[l] ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(m);
}

double variable_accuracy(const VectorXd& theta_hat, const VectorXd& theta_true) {
  if (theta_hat.size() != theta_true.size() || theta_hat.size() == 0) {
    throw DimensionError("variable accuracy needs equal, nonzero lengths");
  }
  const auto agree = ((theta_hat.array() != 0.0) == (theta_true.array() != 0.0)).count();
  return static_cast<double>(agree) / static_cast<double>(theta_hat.size());
}

IntegratedErrors mise_ise(const MatrixXd& beta_hat, const MatrixXd& beta_true) {
  if (beta_hat.rows() != beta_true.rows() || beta_hat.cols() != beta_true.cols()) {
    throw DimensionError("slope curves are not on the same grid");
  }
  IntegratedErrors out;
  out.ise = (beta_hat - beta_true).array().square().rowwise().mean();
  out.mise = out.ise.size() > 0 ? out.ise.mean() : 0.0;
  return out;
}

double mape(const VectorXd& y_hat, const VectorXd& y) {
  if (y_hat.size() != y.size() || y.size() == 0) throw DimensionError("mape needs equal, nonzero lengths");
  return (y_hat - y).array().abs().mean();
}

VectorXd function_norms(const MatrixXd& betas) { return betas.array().square().rowwise().mean().sqrt(); }

}  // namespace wavecqr
