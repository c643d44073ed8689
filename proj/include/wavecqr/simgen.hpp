#pragma once

#include "wavecqr/model.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace wavecqr::sim {

inline constexpr Index kNumCurves = 12;
inline constexpr Index kNumScalars = 2;
inline constexpr Index kNumActive = 4;

enum class Noise { normal, mixture, t3, cauchy };

Noise noise_from_name(std::string_view name);
std::string_view noise_name(Noise noise);

struct SimConfig {
  Index n = 200;
  /// Signal-to-noise ratio; +infinity gives a noiseless response.
  double snr = 5.0;
  Noise noise = Noise::normal;
  std::uint64_t seed = 1;
  Index grid_len = 256;
  std::string filter = "sym6";

  void validate() const;
};

struct TrueSlopes {
  MatrixXd beta;   // 12 x N
  MatrixXd theta;  // 12 x N, wavelet coefficients of beta (exact zeros)
};

struct SimulatedDataset {
  Dataset data;
  MatrixXd beta_true;
  MatrixXd theta_true;
  VectorXd gamma_true;
  double sigma = 0.0;
  double signal_mean = 0.0;
  VectorXd noiseless_response;

  /// theta_true flattened into the m*N layout of CoefficientSet::theta.
  VectorXd theta_true_flat() const;
  std::vector<Index> true_support() const;
};

/// The four base slope functions on [0,1].
double slope_f1(double t);
double slope_f2(double t);
double slope_f3(double t);
double slope_f4(double t);

/// Thresholded (|c| > 0.1) wavelet versions of f1..f4 scaled to unit function
/// L2 norm; slopes 5..12 are zero.
TrueSlopes gen_true_betas(const WaveletFilter& filter, Index grid_len);

/// Linear mixing of the 12 omega processes into the observed curves, applied
/// per sample; rows of `omega` are processes (12 x N).
MatrixXd mix_curves(const MatrixXd& omega);

/// Mixing weights a such that x_l = sum_j a(l, j) * omega_j.
Eigen::Matrix<double, 12, 12> mixing_weights();

double sigma_from_snr(const VectorXd& noiseless_response, double snr);

SimulatedDataset gen_dataset(const SimConfig& cfg);

}  // namespace wavecqr::sim
