#pragma once

#include "wavecqr/model.hpp"

#include <vector>

namespace wavecqr {

struct MetricReport {
  double mise = 0.0;
  double mape = 0.0;
  double ga = 0.0;
  double va = 0.0;
  VectorXd ise;
};

/// Proportion of the m groups classified the same way (selected / dropped) by
/// both supports. Supports hold zero-based indices in [0, m).
double group_accuracy(const std::vector<Index>& estimated, const std::vector<Index>& truth, Index m);

/// Same proportion over individual coefficients, support = exact nonzeros.
double variable_accuracy(const VectorXd& theta_hat, const VectorXd& theta_true);

struct IntegratedErrors {
  double mise = 0.0;
  VectorXd ise;
};

/// ISE_l = mean_j (beta_hat_l(t_j) - beta_l(t_j))^2 and MISE = mean_l ISE_l.
/// Rows are predictors, columns grid points.
IntegratedErrors mise_ise(const MatrixXd& beta_hat, const MatrixXd& beta_true);

double mape(const VectorXd& y_hat, const VectorXd& y);

/// Function norm sqrt(mean_j beta(t_j)^2) of every row.
VectorXd function_norms(const MatrixXd& betas);

}  // namespace wavecqr
