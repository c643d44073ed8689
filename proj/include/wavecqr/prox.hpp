#pragma once

#include "wavecqr/model.hpp"

#include <Eigen/Cholesky>

namespace wavecqr {

/// argmin_r rho_tau(r) + (eta1/2)(c - r)^2.
double prox_check(double c, double tau, double eta1);

VectorXd soft_threshold(const VectorXd& v, double t);

/// Minimizer of t1*||b||_1 + t2*||b||_2 + 0.5*||b - c||^2.
VectorXd prox_sgl_block(const VectorXd& c, double t1, double t2);

/// Solution of the quadratic step
///   min (eta/2)||theta - c||^2 + (eta1/2) sum_{k,i} (b_ki - alpha_k - u_i'gamma - v_i'theta)^2
/// for arbitrary targets b (K x n) and anchor c. The system matrix only
/// depends on the design, K, eta and eta1, so it is factorized once here.
///
/// The level intercepts separate as alpha_k = abar + mean_i(b_ki - bbar_i),
/// leaving a single-target ridge problem in (abar, gamma, theta) that is
/// solved through the n x n matrix VV' + rho*I, rho = eta/(K*eta1), and a
/// (1+q) x (1+q) Schur complement for the unpenalized columns.
class QuadraticStep {
 public:
  QuadraticStep(const Design& design, Index levels, double eta, double eta1);

  struct Fitted {
    /// Shared part abar + u_i'gamma + v_i'theta.
    VectorXd shared;
    /// Level offsets alpha_k - abar.
    VectorXd offsets;
    /// abar and gamma.
    VectorXd scalar_coef;
    /// H^{-1} d, from which theta = c + V' * solved_direction.
    VectorXd direction;
  };

  /// Fitted values for targets `b` with precomputed `vc` = V*c. Costs O(n^2 + K n).
  Fitted solve_fitted(const MatrixXd& b, const VectorXd& vc) const;
  /// theta = c + V' * direction. Costs O(n * mN).
  VectorXd theta_from(const VectorXd& c, const VectorXd& direction) const;

  /// Full solve returning all coefficients.
  CoefficientSet solve(const MatrixXd& b, const VectorXd& anchor) const;

  const Design& design() const { return *design_; }
  Index levels() const { return levels_; }
  double eta() const { return eta_; }
  double eta1() const { return eta1_; }

 private:
  MatrixXd solve_gram(const MatrixXd& rhs) const;

  const Design* design_;
  Index levels_;
  double eta_;
  double eta1_;
  double rho_;
  MatrixXd scalar_cols_;  // n x (1+q): intercept and u
  Eigen::LLT<MatrixXd> gram_;       // VV' + rho I (unused when m = 0)
  MatrixXd g_scalar_;               // H^{-1} B
  Eigen::LLT<MatrixXd> schur_;      // B' H^{-1} B
};

/// Free-function form: minimizer of
///   (eta/2)||theta - anchor + w||^2 + (eta1/2) sum (y_i - a_ki'x - r_ki + z_ki)^2.
/// `r` and `z` are K x n.
CoefficientSet solve_quadratic_step(const Design& design, const VectorXd& y, const QuantileLevels& taus,
                                    const MatrixXd& r, const MatrixXd& z, const VectorXd& theta_anchor,
                                    const VectorXd& w, double eta, double eta1);

}  // namespace wavecqr
