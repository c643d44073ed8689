#pragma once

#include "wavecqr/wavelet.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace wavecqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// n samples of m curves on an N-point grid, q scalar covariates and a
/// response. `curves` is n x (m*N); curve l of sample i occupies columns
/// [l*N, (l+1)*N) of row i.
struct Dataset {
  MatrixXd curves;
  MatrixXd scalars;
  VectorXd response;
  Index m = 0;
  Index grid_len = 0;

  Index n() const { return response.size(); }
  Index q() const { return scalars.cols(); }

  /// Throws DimensionError / DataError when shapes disagree, N is not dyadic
  /// (for m > 0) or any value is non-finite.
  void validate() const;

  Eigen::Ref<const VectorXd> curve(Index i, Index l) const {
    return curves.row(i).segment(l * grid_len, grid_len).transpose();
  }

  /// Rows in `idx` (repeats allowed), in order.
  Dataset subset(const std::vector<Index>& idx) const;
  Dataset rows(Index begin, Index end) const;
};

/// Row a_i = (1, v_i, u_i) where v_i stacks dwt(curve_il)/N over l.
struct Design {
  MatrixXd rows;
  Index m = 0;
  Index grid_len = 0;
  Index q = 0;

  Index n() const { return rows.rows(); }
  Index p() const { return rows.cols(); }
  Index theta_size() const { return m * grid_len; }

  auto wavelet_block() const { return rows.middleCols(1, theta_size()); }
  auto scalar_block() const { return rows.rightCols(q); }
};

class QuantileLevels {
 public:
  explicit QuantileLevels(std::vector<double> taus);
  static QuantileLevels single(double tau) { return QuantileLevels({tau}); }
  /// K equally spaced levels k/(K+1), k = 1..K.
  static QuantileLevels equally_spaced(int count);

  Index size() const { return static_cast<Index>(taus_.size()); }
  double operator[](Index k) const { return taus_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& values() const { return taus_; }

 private:
  std::vector<double> taus_;
};

struct CoefficientSet {
  VectorXd alpha;
  VectorXd gamma;
  VectorXd theta;
  Index m = 0;
  Index grid_len = 0;

  static CoefficientSet zeros(Index K, Index q, Index m, Index grid_len);

  auto block(Index l) { return theta.segment(l * grid_len, grid_len); }
  auto block(Index l) const { return theta.segment(l * grid_len, grid_len); }
};

struct PenaltySpec {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const;
};

Design build_design(const Dataset& data, const WaveletFilter& filter);
/// Optional preprocessing: rescales each scalar column to unit sample
/// variance in place. Constant columns are left untouched.
void standardize_scalars(Dataset& data);

double check_loss(double r, double tau);

/// lambda1 * sum_l ||b_l||_1 + lambda2 * sum_l ||b_l||_2 over the m blocks of
/// length `grid_len` in theta.
double sgl_penalty(const VectorXd& theta, Index grid_len, const PenaltySpec& pen);

/// Fitted quantile at level k for every row: alpha_k + u_i'gamma + v_i'theta.
VectorXd predict_quantile(const CoefficientSet& params, const Design& design, Index k);

/// Sum over levels and samples of the check loss.
double composite_loss(const CoefficientSet& params, const Design& design, const VectorXd& y,
                      const QuantileLevels& taus);

double objective(const CoefficientSet& params, const Design& design, const VectorXd& y,
                 const QuantileLevels& taus, const PenaltySpec& pen);

/// Slope samples beta(t_j) from a wavelet block: idwt at full depth.
VectorXd reconstruct_beta(const VectorXd& theta_block, const WaveletFilter& filter);
/// m x N matrix of reconstructed slope curves.
MatrixXd reconstruct_betas(const CoefficientSet& params, const WaveletFilter& filter);

/// Checks K, q, m, N of `params` against the design; throws DimensionError.
void check_dimensions(const CoefficientSet& params, const Design& design, Index K);

}  // namespace wavecqr
