#pragma once

#include "wavecqr/admm.hpp"
#include "wavecqr/simgen.hpp"
#include "wavecqr/tuning.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace wavecqr {

/// Monte Carlo replication of the simulation study: every replicate draws
/// 12n samples from the generator, splits them into training (n), tuning (n)
/// and test (10n) sets, fits the whole penalty path per method on the
/// training set and evaluates both the validation-selected and the
/// GIC-selected fit.
struct ExperimentConfig {
  Index n = 200;
  double snr = 5.0;
  sim::Noise noise = sim::Noise::normal;
  int reps = 20;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::qSGL, Method::qL, Method::qGL};
  std::vector<double> taus{0.5};
  double ratio = 0.5;
  int grid_size = 30;
  double grid_min_fraction = 1e-3;
  Index grid_len = 256;
  std::string filter = "sym6";
  int threads = 1;
  SolverConfig solver;

  /// Called for every path fit with the replicate index. May run on worker
  /// threads concurrently.
  std::function<void(int rep, Method method, const FitResult& fit)> fit_observer;

  void validate() const;
};

struct ReplicateResult {
  int rep = 0;
  std::uint64_t seed = 0;
  Method method = Method::qSGL;
  Criterion criterion = Criterion::gic;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mise = 0.0;
  VectorXd ise;
  double mape = 0.0;
  double ga = 0.0;
  double va = 0.0;
  Index support_groups = 0;
  bool converged = false;
  double sigma = 0.0;
  /// Path fits of this (replicate, method) that reported non-convergence.
  int unconverged_fits = 0;
};

/// Results ordered by (replicate, method order, criterion validation then gic);
/// identical for every thread count.
std::vector<ReplicateResult> run_experiment(const ExperimentConfig& cfg);

struct AggregateRow {
  Method method = Method::qSGL;
  Criterion criterion = Criterion::gic;
  int reps = 0;
  double mise_median = 0.0, mise_iqr = 0.0;
  double mape_median = 0.0, mape_iqr = 0.0;
  double ga_median = 0.0, ga_iqr = 0.0;
  double va_median = 0.0, va_iqr = 0.0;
  /// Median ISE of every predictor.
  VectorXd ise_median;
  /// Median over replicates of sum_l ISE_l.
  double ise_sum_median = 0.0;
  int unconverged = 0;
};

/// Medians and interquartile ranges (type-7 quantiles) per (method, criterion).
std::vector<AggregateRow> aggregate(const std::vector<ReplicateResult>& results);

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateResult>& results);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace wavecqr
