#include "wavecqr/wavelet.hpp"

#include "wavecqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wavecqr {

namespace {

// Scaling filters h[0..L-1] in synthesis order.
// Published 16-digit taps refined to double precision against the
// orthonormality and vanishing-moment equations.
constexpr double kSym6[] = {
    -0.0078007083250251116, 0.00176771186424508,   0.044724901770786733,
    -0.021060292512352304,  -0.07263752278640729,  0.33792942172808804,
    0.7876411410286391,     0.49105594192804609,   -0.048311742585647343,
    -0.11799011114852581,   0.0034907120842069084, 0.015404109327040953,
};

constexpr double kDb2[] = {
    0.48296291314453416, 0.8365163037378079, 0.2241438680420134,
    -0.12940952255126037,
};

constexpr double kDb3[] = {
    0.33267055295008263, 0.8068915093110925,   0.45987750211849154,
    -0.13501102001025458, -0.08544127388202666, 0.03522629188570953,
};

constexpr double kDb4[] = {
    0.2303778133088965,   0.7148465705529157,  0.6308807679298589,
    -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
    0.0328830116668852,   -0.010597401785069032,
};

constexpr double kFilterTol = 1e-12;

void validate_taps(const std::string& name, const std::vector<double>& h) {
  if (h.size() < 2 || h.size() % 2 != 0) {
    throw ParameterError("wavelet filter " + name + " must have an even number of taps");
  }
  double sum = 0.0;
  for (double t : h) sum += t;
  if (std::abs(sum - std::numbers::sqrt2) > kFilterTol) {
    throw ParameterError("wavelet filter " + name + ": taps do not sum to sqrt(2)");
  }
  for (std::size_t shift = 0; shift < h.size(); shift += 2) {
    double ip = 0.0;
    for (std::size_t k = 0; k + shift < h.size(); ++k) ip += h[k] * h[k + shift];
    const double expected = shift == 0 ? 1.0 : 0.0;
    if (std::abs(ip - expected) > kFilterTol) {
      throw ParameterError("wavelet filter " + name + ": taps are not orthonormal");
    }
  }
}

// One analysis step on the leading `len` entries of `work`, using `tmp` as
// scratch. Afterwards work[0..len/2) holds approximation and
// work[len/2..len) holds detail coefficients.
void analysis_step(std::vector<double>& work, std::vector<double>& tmp, std::size_t len,
                   const WaveletFilter& f) {
  const auto& h = f.lowpass();
  const auto& g = f.highpass();
  const std::size_t half = len / 2;
  const std::size_t taps = h.size();
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t t = 0; t < taps; ++t) {
      const double x = work[(2 * k + t) % len];
      a += h[t] * x;
      d += g[t] * x;
    }
    tmp[k] = a;
    tmp[half + k] = d;
  }
  std::copy_n(tmp.begin(), len, work.begin());
}

void synthesis_step(std::vector<double>& work, std::vector<double>& tmp, std::size_t len,
                    const WaveletFilter& f) {
  const auto& h = f.lowpass();
  const auto& g = f.highpass();
  const std::size_t half = len / 2;
  const std::size_t taps = h.size();
  std::fill_n(tmp.begin(), len, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    const double a = work[k];
    const double d = work[half + k];
    for (std::size_t t = 0; t < taps; ++t) {
      tmp[(2 * k + t) % len] += h[t] * a + g[t] * d;
    }
  }
  std::copy_n(tmp.begin(), len, work.begin());
}

}  // namespace

WaveletFilter::WaveletFilter(WaveletFamily family, std::string name, std::vector<double> taps)
    : family_(family), name_(std::move(name)), lowpass_(std::move(taps)) {
  validate_taps(name_, lowpass_);
  const std::size_t len = lowpass_.size();
  highpass_.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    highpass_[k] = sign * lowpass_[len - 1 - k];
  }
}

WaveletFilter WaveletFilter::haar() {
  const double s = 1.0 / std::numbers::sqrt2;
  return WaveletFilter(WaveletFamily::haar, "haar", {s, s});
}

WaveletFilter WaveletFilter::sym6() {
  return WaveletFilter(WaveletFamily::sym6, "sym6", {std::begin(kSym6), std::end(kSym6)});
}

WaveletFilter WaveletFilter::daubechies(int moments) {
  switch (moments) {
    case 1: return haar();
    case 2: return WaveletFilter(WaveletFamily::daubechies, "db2", {std::begin(kDb2), std::end(kDb2)});
    case 3: return WaveletFilter(WaveletFamily::daubechies, "db3", {std::begin(kDb3), std::end(kDb3)});
    case 4: return WaveletFilter(WaveletFamily::daubechies, "db4", {std::begin(kDb4), std::end(kDb4)});
    default:
      throw ParameterError("daubechies filter with " + std::to_string(moments) +
                           " vanishing moments is not available (supported: 1-4)");
  }
}

WaveletFilter WaveletFilter::from_name(std::string_view name) {
  if (name == "haar" || name == "db1") return haar();
  if (name == "sym6") return sym6();
  if (name == "db2") return daubechies(2);
  if (name == "db3") return daubechies(3);
  if (name == "db4") return daubechies(4);
  throw ParameterError("unknown wavelet filter '" + std::string(name) + "'");
}

std::size_t WaveletCoeffs::approx_size() const {
  const int J = dyadic_exponent(size());
  return std::size_t{1} << (J - levels);
}

std::pair<std::size_t, std::size_t> WaveletCoeffs::detail_band(int j) const {
  const int J = dyadic_exponent(size());
  const int j0 = J - levels;
  if (j < j0 || j >= J) throw DimensionError("detail band index out of range");
  const std::size_t len = std::size_t{1} << j;
  return {len, len};  // band at scale j starts at offset 2^j
}

bool is_dyadic(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

int dyadic_exponent(std::size_t n) {
  if (!is_dyadic(n)) {
    throw DimensionError("length " + std::to_string(n) + " is not a power of two >= 2");
  }
  int J = 0;
  while ((std::size_t{1} << J) < n) ++J;
  return J;
}

WaveletCoeffs dwt(std::span<const double> signal, const WaveletFilter& filter, int levels) {
  const int J = dyadic_exponent(signal.size());
  if (levels < 1 || levels > J) {
    throw DimensionError("decomposition depth " + std::to_string(levels) +
                         " outside [1, " + std::to_string(J) + "]");
  }
  std::vector<double> work(signal.begin(), signal.end());
  std::vector<double> tmp(work.size());
  std::size_t len = work.size();
  for (int lev = 0; lev < levels; ++lev) {
    analysis_step(work, tmp, len, filter);
    len /= 2;
  }
  WaveletCoeffs out;
  out.values = Eigen::Map<const Eigen::VectorXd>(work.data(), static_cast<Eigen::Index>(work.size()));
  out.levels = levels;
  return out;
}

WaveletCoeffs dwt(std::span<const double> signal, const WaveletFilter& filter) {
  return dwt(signal, filter, dyadic_exponent(signal.size()));
}

Eigen::VectorXd idwt(const WaveletCoeffs& coeffs, const WaveletFilter& filter) {
  const int J = dyadic_exponent(coeffs.size());
  if (coeffs.levels < 1 || coeffs.levels > J) {
    throw DimensionError("coefficient layout declares " + std::to_string(coeffs.levels) +
                         " levels for length " + std::to_string(coeffs.size()));
  }
  std::vector<double> work(coeffs.values.data(), coeffs.values.data() + coeffs.values.size());
  std::vector<double> tmp(work.size());
  std::size_t len = work.size() >> (coeffs.levels - 1);
  for (int lev = 0; lev < coeffs.levels; ++lev) {
    synthesis_step(work, tmp, len, filter);
    len *= 2;
  }
  return Eigen::Map<Eigen::VectorXd>(work.data(), static_cast<Eigen::Index>(work.size()));
}

Eigen::MatrixXd wavelet_matrix(std::size_t n, const WaveletFilter& filter, int levels) {
  dyadic_exponent(n);
  Eigen::MatrixXd w(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    w.col(static_cast<Eigen::Index>(j)) = dwt(e, filter, levels).values;
    e[j] = 0.0;
  }
  return w;
}

}  // namespace wavecqr
