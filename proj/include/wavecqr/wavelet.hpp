#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wavecqr {

enum class WaveletFamily { haar, sym6, daubechies };

/// Orthonormal two-channel filter pair. `lowpass` holds the scaling filter
/// h[0..L-1]; `highpass` is its quadrature mirror g[k] = (-1)^k h[L-1-k].
class WaveletFilter {
 public:
  static WaveletFilter haar();
  static WaveletFilter sym6();
  /// Extremal-phase Daubechies filter with `moments` vanishing moments
  /// (supported: 1..4; 1 is Haar).
  static WaveletFilter daubechies(int moments);
  /// Parses "haar", "sym6", "db1".."db4".
  static WaveletFilter from_name(std::string_view name);

  WaveletFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& lowpass() const { return lowpass_; }
  const std::vector<double>& highpass() const { return highpass_; }
  std::size_t length() const { return lowpass_.size(); }

 private:
  WaveletFilter(WaveletFamily family, std::string name, std::vector<double> taps);

  WaveletFamily family_;
  std::string name_;
  std::vector<double> lowpass_;
  std::vector<double> highpass_;
};

/// Coefficients in coarsest-first layout: 2^j0 approximation slots, then
/// detail bands of sizes 2^j0, 2^(j0+1), ..., 2^(J-1), with j0 = J - levels.
struct WaveletCoeffs {
  Eigen::VectorXd values;
  int levels = 0;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// Number of approximation coefficients (2^j0).
  std::size_t approx_size() const;
  /// Offset and length of the detail band at scale j (j0 <= j < J).
  std::pair<std::size_t, std::size_t> detail_band(int j) const;
};

/// Returns J if n == 2^J with J >= 1, otherwise throws DimensionError.
int dyadic_exponent(std::size_t n);
bool is_dyadic(std::size_t n);

WaveletCoeffs dwt(std::span<const double> signal, const WaveletFilter& filter, int levels);
/// Full-depth transform (levels = J).
WaveletCoeffs dwt(std::span<const double> signal, const WaveletFilter& filter);

Eigen::VectorXd idwt(const WaveletCoeffs& coeffs, const WaveletFilter& filter);

/// N x N matrix W with W * x == dwt(x).values; W is orthogonal.
Eigen::MatrixXd wavelet_matrix(std::size_t n, const WaveletFilter& filter, int levels);

}  // namespace wavecqr
