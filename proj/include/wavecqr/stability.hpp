#pragma once

#include "wavecqr/admm.hpp"
#include "wavecqr/tuning.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace wavecqr {

struct StabilityConfig {
  int bootstraps = 100;
  double norm_threshold = 1e-5;
  std::uint64_t seed = 1;
  Method method = Method::qSGL;
  double ratio = 0.5;
  int grid_size = 30;
  double grid_min_fraction = 1e-3;
  int threads = 1;
};

/// min, q1, median, q3, max
using FiveNumber = std::array<double, 5>;

/// Type-7 (linear interpolation) sample quantile; `values` need not be sorted.
double sample_quantile(std::vector<double> values, double p);
FiveNumber five_number_summary(const std::vector<double>& values);

struct StabilityReport {
  /// bootstraps x m function norms ||beta_hat_l||; rows of degenerate
  /// replicates are NaN.
  MatrixXd norms;
  std::vector<bool> degenerate;
  VectorXd median_norms;
  std::vector<Index> selected;
  std::vector<FiveNumber> summaries;

  int degenerate_count() const;
};

/// Bootstrap stability selection: each replicate resamples whole observations
/// with replacement, tunes by GIC on the replicate and records the function
/// norm of every estimated slope. Predictor l is selected when the median
/// norm over non-degenerate replicates exceeds cfg.norm_threshold.
StabilityReport stability_select(const Dataset& data, const QuantileLevels& taus, const StabilityConfig& cfg,
                                 const SolverConfig& solver, const WaveletFilter& filter);

}  // namespace wavecqr
