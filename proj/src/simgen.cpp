#include "wavecqr/simgen.hpp"

#include "wavecqr/errors.hpp"
#include "wavecqr/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace wavecqr::sim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCoefThreshold = 0.1;

double beta_density(double t, double a, double b) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return std::exp(log_norm + (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t));
}

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

double grid_point(Index j, Index N, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(N - 1);
}

}  // namespace

Noise noise_from_name(std::string_view name) {
  if (name == "normal" || name == "1") return Noise::normal;
  if (name == "mixture" || name == "2") return Noise::mixture;
  if (name == "t3" || name == "3") return Noise::t3;
  if (name == "cauchy" || name == "4") return Noise::cauchy;
  throw ParameterError("unknown noise family '" + std::string(name) + "'");
}

std::string_view noise_name(Noise noise) {
  switch (noise) {
    case Noise::normal: return "normal";
    case Noise::mixture: return "mixture";
    case Noise::t3: return "t3";
    case Noise::cauchy: return "cauchy";
  }
  return "normal";
}

void SimConfig::validate() const {
  if (n < 1) throw ParameterError("simulation needs n >= 1");
  if (!(snr > 0.0)) throw ParameterError("snr must be positive");
  dyadic_exponent(static_cast<std::size_t>(grid_len));
}

VectorXd SimulatedDataset::theta_true_flat() const {
  VectorXd flat(theta_true.size());
  const Index N = theta_true.cols();
  for (Index l = 0; l < theta_true.rows(); ++l) flat.segment(l * N, N) = theta_true.row(l).transpose();
  return flat;
}

std::vector<Index> SimulatedDataset::true_support() const {
  std::vector<Index> out;
  for (Index l = 0; l < beta_true.rows(); ++l) {
    if ((theta_true.row(l).array() != 0.0).any()) out.push_back(l);
  }
  return out;
}

double slope_f1(double t) { return 0.03 * beta_density(t, 20, 60) - 0.05 * beta_density(t, 50, 20); }

double slope_f2(double t) { return 4.0 * std::sin(4.0 * kPi * t) - sign(t - 0.3) - sign(0.72 - t); }

double slope_f3(double t) { return -3.0 * std::cos(2.0 * kPi * t) + 3.0 * std::exp(t * t) / (t * t * t + 1.0); }

double slope_f4(double t) {
  const double s = std::sin(2.0 * kPi * t);
  const double c = std::cos(2.0 * kPi * t);
  return 0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s;
}

TrueSlopes gen_true_betas(const WaveletFilter& filter, Index grid_len) {
  const Index N = grid_len;
  dyadic_exponent(static_cast<std::size_t>(N));
  TrueSlopes out;
  out.beta = MatrixXd::Zero(kNumCurves, N);
  out.theta = MatrixXd::Zero(kNumCurves, N);
  double (*const base[kNumActive])(double) = {slope_f1, slope_f2, slope_f3, slope_f4};
  std::vector<double> samples(static_cast<std::size_t>(N));
  for (Index l = 0; l < kNumActive; ++l) {
    for (Index j = 0; j < N; ++j) samples[static_cast<std::size_t>(j)] = base[l](grid_point(j, N, 0.0, 1.0));
    WaveletCoeffs c = dwt(samples, filter);
    for (Index j = 0; j < N; ++j) {
      if (!(std::abs(c.values(j)) > kCoefThreshold)) c.values(j) = 0.0;
    }
    // Unit function norm sqrt(mean beta^2); the transform is orthonormal so
    // the same scale applies to the coefficients.
    const double fn_norm = c.values.norm() / std::sqrt(static_cast<double>(N));
    c.values /= fn_norm;
    out.theta.row(l) = c.values.transpose();
    out.beta.row(l) = idwt(c, filter).transpose();
  }
  return out;
}

Eigen::Matrix<double, 12, 12> mixing_weights() {
  Eigen::Matrix<double, 12, 12> a = Eigen::Matrix<double, 12, 12>::Identity();
  // Zero-based: x1 = sqrt(.84) w1 + .4 w6
  a(0, 0) = std::sqrt(0.84);
  a(0, 5) = 0.4;
  // x2 = sqrt(.98) w2 + .1 w1 + .1 w5
  a(1, 1) = std::sqrt(0.98);
  a(1, 0) = 0.1;
  a(1, 4) = 0.1;
  // x3 = sqrt(.84) w3 + .4 w4
  a(2, 2) = std::sqrt(0.84);
  a(2, 3) = 0.4;
  // x5 = sqrt(.99) w5 + .1 w2
  a(4, 4) = std::sqrt(0.99);
  a(4, 1) = 0.1;
  return a;
}

MatrixXd mix_curves(const MatrixXd& omega) {
  if (omega.rows() != kNumCurves) throw DimensionError("mixing expects 12 processes");
  return mixing_weights() * omega;
}

double sigma_from_snr(const VectorXd& noiseless_response, double snr) {
  if (!(snr > 0.0)) throw ParameterError("snr must be positive");
  if (std::isinf(snr)) return 0.0;
  const double mu = noiseless_response.mean();
  if (!(std::abs(mu) >= 1e-8)) {
    throw DataError("signal mean is numerically zero; SNR = mean/sigma is undefined");
  }
  return std::abs(mu) / snr;
}

SimulatedDataset gen_dataset(const SimConfig& cfg) {
  cfg.validate();
  const Index n = cfg.n;
  const Index N = cfg.grid_len;
  const Index m = kNumCurves;
  const WaveletFilter filter = WaveletFilter::from_name(cfg.filter);

  Rng rng(cfg.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  auto normal = [&](double mean, double sd) { return mean + sd * std_normal(rng); };
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  SimulatedDataset out;
  const TrueSlopes slopes = gen_true_betas(filter, N);
  out.beta_true = slopes.beta;
  out.theta_true = slopes.theta;
  out.gamma_true = VectorXd::Constant(kNumScalars, 0.32 / 256.0);

  Dataset& data = out.data;
  data.m = m;
  data.grid_len = N;
  data.scalars.resize(n, kNumScalars);
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < n; ++i) {
    data.scalars(i, 0) = std_normal(rng);
    data.scalars(i, 1) = coin(rng) ? 1.0 : 0.0;
  }

  // z processes: sample i, process l at row i, columns [l*N, (l+1)*N).
  MatrixXd z(n, m * N);
  std::vector<double> g(49);
  for (Index i = 0; i < n; ++i) {
    auto put = [&](Index l, auto&& fn, double lo, double hi) {
      for (Index j = 0; j < N; ++j) z(i, l * N + j) = fn(grid_point(j, N, lo, hi));
    };
    {
      const double a1 = normal(-4.0, 3.0), a2 = normal(7.0, 1.5);
      put(0, [&](double t) { return std::cos(2.0 * kPi * (t - a1)) + a2; }, 0.0, 1.0);
    }
    {
      const double b1 = normal(-3.0, 1.2), b2 = normal(2.0, 0.5), b3 = normal(-2.0, 1.0);
      put(1, [&](double t) { return b1 * t * t * t + b2 * t * t + b3 * t; }, -1.0, 1.0);
    }
    {
      const double c1 = normal(-2.0, 1.0), c2 = normal(3.0, 1.5);
      put(2, [&](double t) { return std::sin(2.0 * (t - c1)) + c2 * t; }, 0.0, kPi / 3.0);
    }
    {
      const double d1 = uniform(2.0, 7.0), d2 = normal(2.0, 0.4);
      put(3, [&](double t) { return d1 * std::cos(2.0 * t) + d2 * t; }, -2.0, 1.0);
    }
    {
      const double e1 = uniform(3.0, 7.0), e2 = normal(0.0, 1.0);
      put(4, [&](double t) { return e1 * std::sin(kPi * t) + e2; }, 0.0, kPi / 3.0);
    }
    {
      const double f1 = normal(4.0, 2.0), f2 = normal(-3.0, 0.5), f3 = normal(1.0, 1.0);
      put(5, [&](double t) { return f1 * std::exp(-t / 3.0) + f2 * t + f3; }, -1.0, 1.0);
    }
    for (Index l = 6; l < m; ++l) {
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = normal(0.0, 1.0 / static_cast<double>(j + 2));
      const double h = std_normal(rng);
      put(l,
          [&](double t) {
            double s = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j) s += std::cos(static_cast<double>(j + 1) * kPi * t) * g[j];
            return 5.0 * std::numbers::sqrt2 * s + 5.0 * h;
          },
          0.0, 1.0);
    }
  }

  // omega = z + scalar shift with sd .05 * range of z_l over the batch.
  MatrixXd omega = z;
  for (Index l = 0; l < m; ++l) {
    const auto block = z.middleCols(l * N, N);
    const double range = block.maxCoeff() - block.minCoeff();
    for (Index i = 0; i < n; ++i) {
      omega.block(i, l * N, 1, N).array() += normal(0.0, 0.05 * range);
    }
  }

  const auto weights = mixing_weights();
  data.curves.resize(n, m * N);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < m; ++l) {
      auto row = data.curves.block(i, l * N, 1, N);
      row.setZero();
      for (Index s = 0; s < m; ++s) {
        if (weights(l, s) != 0.0) row += weights(l, s) * omega.block(i, s * N, 1, N);
      }
    }
  }

  out.noiseless_response.resize(n);
  const double inv_n = 1.0 / static_cast<double>(N);
  for (Index i = 0; i < n; ++i) {
    double integral = 0.0;
    for (Index l = 0; l < kNumActive; ++l) {
      integral += data.curves.row(i).segment(l * N, N).dot(out.beta_true.row(l)) * inv_n;
    }
    out.noiseless_response(i) = data.scalars.row(i).dot(out.gamma_true) + integral;
  }
  out.signal_mean = out.noiseless_response.mean();
  out.sigma = sigma_from_snr(out.noiseless_response, cfg.snr);

  data.response.resize(n);
  std::student_t_distribution<double> student(3.0);
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  std::bernoulli_distribution contaminate(0.05);
  for (Index i = 0; i < n; ++i) {
    double eps = 0.0;
    switch (cfg.noise) {
      case Noise::normal: eps = std_normal(rng); break;
      case Noise::mixture: {
        const bool wide = contaminate(rng);
        eps = std_normal(rng) * (wide ? std::sqrt(10.0) : 1.0);
        break;
      }
      case Noise::t3: eps = student(rng); break;
      case Noise::cauchy: eps = cauchy(rng); break;
    }
    data.response(i) = out.noiseless_response(i) + out.sigma * eps;
  }
  return out;
}

}  // namespace wavecqr::sim
