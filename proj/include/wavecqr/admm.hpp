#pragma once

#include "wavecqr/model.hpp"
#include "wavecqr/prox.hpp"

#include <iosfwd>
#include <memory>

namespace wavecqr {

struct SolverConfig {
  double eta = 1.0;
  double eta1 = 1.0;
  double eps_abs = 1e-4;
  double eps_rel = 1e-2;
  int max_outer = 5000;
  int max_inner = 200;
  /// Tolerances of the inner ADMM (same residual rule, tighter constants).
  double inner_eps_abs = 1e-6;
  double inner_eps_rel = 1e-4;
  /// Carry r, z and the fitted values of the inner ADMM across outer iterations.
  bool warm_start = true;
  /// When set, one JSON record per outer iteration is written here.
  std::ostream* trace = nullptr;

  void validate() const;
};

/// Outer stopping thresholds for the split theta = theta*.
struct StoppingThresholds {
  double primal = 0.0;
  double dual = 0.0;
};

StoppingThresholds stopping_thresholds(const VectorXd& theta, const VectorXd& theta_sparse, const VectorXd& w,
                                       Index q, Index K, const SolverConfig& cfg);

struct FitResult {
  /// Intercepts, gamma and the exactly sparse theta*.
  CoefficientSet params;
  VectorXd theta_dense;
  /// Scaled dual of theta = theta*.
  VectorXd dual;
  int outer_iters = 0;
  long inner_iters_total = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  StoppingThresholds thresholds;
  double objective = 0.0;
  bool converged = false;
  /// Outer iterations where the augmented Lagrangian rose by more than
  /// 1e-3 * (1 + |value|).
  int merit_increases = 0;

  /// Inner ADMM state, kept for warm starts along a lambda path.
  MatrixXd inner_r;
  MatrixXd inner_z;

  /// Indices l with a nonzero block in theta*.
  std::vector<Index> support_blocks() const;
  /// Number of nonzero entries of theta*.
  Index support_size() const;
};

/// Solver bound to one design/response/level set; the quadratic-step
/// factorization is shared by every fit along a penalty path.
class AdmmSolver {
 public:
  AdmmSolver(const Design& design, const VectorXd& y, const QuantileLevels& taus, SolverConfig cfg = {});

  FitResult fit(const PenaltySpec& pen, const FitResult* warm = nullptr) const;

  const Design& design() const { return *design_; }
  const VectorXd& response() const { return *y_; }
  const QuantileLevels& levels() const { return taus_; }
  const SolverConfig& config() const { return cfg_; }

 private:
  const Design* design_;
  const VectorXd* y_;
  QuantileLevels taus_;
  SolverConfig cfg_;
  QuadraticStep step_;
};

FitResult fit(const Design& design, const VectorXd& y, const QuantileLevels& taus, const PenaltySpec& pen,
              const SolverConfig& cfg = {});

/// Result of one inner ADMM solve of
///   min L_n(alpha, gamma, theta) + (eta/2)||theta - anchor + w||^2.
struct InnerResult {
  CoefficientSet params;
  MatrixXd r;
  MatrixXd z;
  int iterations = 0;
  bool converged = false;
};

/// Runs the inner ADMM from `r0`, `z0` (K x n; empty means zeros).
InnerResult inner_quantile_step(const QuadraticStep& step, const VectorXd& y, const QuantileLevels& taus,
                                const VectorXd& theta_anchor, const VectorXd& w, const SolverConfig& cfg,
                                const MatrixXd& r0 = {}, const MatrixXd& z0 = {});

/// Norm of the smallest subgradient of the objective found at `params`.
/// Residuals with |r| <= zero_tol are treated as exact zeros, whose
/// check-loss subgradient ranges over [tau - 1, tau].
double kkt_residual(const CoefficientSet& params, const Design& design, const VectorXd& y,
                    const QuantileLevels& taus, const PenaltySpec& pen, double zero_tol = 1e-9);

}  // namespace wavecqr
