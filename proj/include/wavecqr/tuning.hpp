#pragma once

#include "wavecqr/admm.hpp"
#include "wavecqr/model.hpp"

#include <string_view>
#include <vector>

namespace wavecqr {

/// qSGL: lambda1 = ratio * s, lambda2 = s. qL: lambda1 = s, lambda2 = 0.
/// qGL: lambda1 = 0, lambda2 = s.
enum class Method { qSGL, qL, qGL };
enum class Criterion { gic, validation };

Method method_from_name(std::string_view name);
std::string_view method_name(Method method);
Criterion criterion_from_name(std::string_view name);
std::string_view criterion_name(Criterion criterion);

PenaltySpec penalty_for(Method method, double scale, double ratio);

struct TuningGrid {
  /// Path scales s, strictly descending and positive.
  std::vector<double> values;
  double ratio = 0.5;
  Criterion criterion = Criterion::gic;
  Method method = Method::qSGL;

  void validate() const;
};

/// `count` log-spaced scales from `lambda_max` down to min_fraction * lambda_max.
std::vector<double> log_spaced_path(double lambda_max, int count = 30, double min_fraction = 1e-3);

struct GicScore {
  double value = 0.0;
  /// Some level has zero average loss; value is -infinity.
  bool degenerate = false;
};

/// (1/K) sum_k ln(mean_i rho_tau_k(y_i - yhat_ki)) + phi_n * ||theta*||_0.
GicScore gic(const FitResult& fit, const Design& design, const VectorXd& y, const QuantileLevels& taus,
             double phi_n);

/// p_n = log(log n) log(log p) / (10 n); 5 p_n for qSGL and qL, p_n for qGL.
double phi_n_default(Index n, Index p, Method method);

/// Mean over levels of the mean check loss of `params` on (design, y).
double mean_check_loss(const CoefficientSet& params, const Design& design, const VectorXd& y,
                       const QuantileLevels& taus);

/// Smallest path scale at which every wavelet block is zero, from the
/// subgradient of the loss at the intercept/scalar-only fit. Residuals that
/// vanish at that fit contribute their whole subgradient range, so the value
/// is an upper bound when the null fit is inexact.
double lambda_max(const Design& design, const VectorXd& y, const QuantileLevels& taus, Method method,
                  double ratio = 0.5);
/// Sparse-group-lasso form with lambda1 = ratio * lambda2.
double lambda_max(const Design& design, const VectorXd& y, const QuantileLevels& taus, double ratio);

struct PathPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  GicScore gic;
  double tune_loss = 0.0;
  Index support_size = 0;
  Index support_groups = 0;
  int outer_iters = 0;
  bool converged = false;
};

struct GridSearchResult {
  std::size_t selected = 0;
  std::size_t selected_gic = 0;
  std::size_t selected_validation = 0;
  std::vector<PathPoint> path;
  std::vector<FitResult> fits;

  const FitResult& best() const { return fits[selected]; }
  double lambda1() const { return path[selected].lambda1; }
  double lambda2() const { return path[selected].lambda2; }
};

/// Fits the whole path on `train` (warm starts down the path) and scores each
/// point by GIC on the training data and by mean check loss on `tune`. Both
/// argmins are recorded; `selected` follows grid.criterion. Ties go to the
/// earlier (sparser) point.
GridSearchResult grid_search(const Design& train, const VectorXd& y_train, const Design& tune,
                             const VectorXd& y_tune, const TuningGrid& grid, const QuantileLevels& taus,
                             const SolverConfig& cfg, double phi_n);

GridSearchResult grid_search(const Dataset& train, const Dataset& tune, const TuningGrid& grid,
                             const QuantileLevels& taus, const SolverConfig& cfg, const WaveletFilter& filter);

}  // namespace wavecqr
