#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the solver code paths being tested.

#include "wavecqr/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double rho(double r, double tau) { return r >= 0 ? tau * r : (tau - 1.0) * r; }

/// Straight-line objective: sum_k sum_i rho(y_i - alpha_k - row_i' * (theta, gamma)) + penalty.
inline double objective(const wavecqr::CoefficientSet& p, const MatrixXd& rows, Index m, Index N, Index q,
                        const VectorXd& y, const std::vector<double>& taus, double l1, double l2) {
  double total = 0.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    for (Index i = 0; i < rows.rows(); ++i) {
      double fit = p.alpha(static_cast<Index>(k));
      for (Index j = 0; j < m * N; ++j) fit += rows(i, 1 + j) * p.theta(j);
      for (Index j = 0; j < q; ++j) fit += rows(i, 1 + m * N + j) * p.gamma(j);
      total += rho(y(i) - fit, taus[k]);
    }
  }
  for (Index l = 0; l < m; ++l) {
    double a = 0.0, s = 0.0;
    for (Index j = 0; j < N; ++j) {
      a += std::abs(p.theta(l * N + j));
      s += p.theta(l * N + j) * p.theta(l * N + j);
    }
    total += l1 * a + l2 * std::sqrt(s);
  }
  return total;
}

/// Minimizer of rho_tau(r) + (eta1/2)(c - r)^2 by scanning r over [lo, hi].
inline double grid_argmin_prox(double c, double tau, double eta1, double lo = -5.0, double hi = 5.0,
                               double step = 1e-4) {
  double best_r = lo;
  double best = std::numeric_limits<double>::infinity();
  const auto count = static_cast<long>(std::llround((hi - lo) / step));
  for (long s = 0; s <= count; ++s) {
    const double r = lo + static_cast<double>(s) * step;
    const double v = rho(r, tau) + 0.5 * eta1 * (c - r) * (c - r);
    if (v < best) {
      best = v;
      best_r = r;
    }
  }
  return best_r;
}

/// Optimal objective of unpenalized median regression of y on the columns of
/// X by enumerating every p-subset of observations it could interpolate.
inline double median_regression_enumeration(const MatrixXd& X, const VectorXd& y, VectorXd* best_beta = nullptr) {
  const Index n = X.rows();
  const Index p = X.cols();
  std::vector<Index> idx(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    MatrixXd A(p, p);
    VectorXd b(p);
    for (Index j = 0; j < p; ++j) {
      A.row(j) = X.row(idx[static_cast<std::size_t>(j)]);
      b(j) = y(idx[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<MatrixXd> lu(A);
    if (lu.isInvertible()) {
      const VectorXd beta = lu.solve(b);
      const double v = 0.5 * (y - X * beta).cwiseAbs().sum();
      if (v < best) {
        best = v;
        if (best_beta) *best_beta = beta;
      }
    }
    Index j = p - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - p + j) --j;
    if (j < 0) break;
    ++idx[static_cast<std::size_t>(j)];
    for (Index t = j + 1; t < p; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
  return best;
}

/// Dense normal-equation solve of
///   min (eta/2)||theta - c||^2 + (eta1/2) sum_{k,i} (b_ki - alpha_k - u_i'gamma - v_i'theta)^2
/// over x = (alpha (K), theta (P), gamma (q)).
inline VectorXd quadratic_step_normal_equations(const MatrixXd& rows, Index P, Index q, const MatrixXd& b,
                                                const VectorXd& c, double eta, double eta1) {
  const Index K = b.rows();
  const Index n = rows.rows();
  const Index dim = K + P + q;
  MatrixXd H = MatrixXd::Zero(dim, dim);
  VectorXd g = VectorXd::Zero(dim);
  for (Index k = 0; k < K; ++k) {
    for (Index i = 0; i < n; ++i) {
      VectorXd a = VectorXd::Zero(dim);
      a(k) = 1.0;
      a.segment(K, P) = rows.row(i).segment(1, P).transpose();
      a.segment(K + P, q) = rows.row(i).segment(1 + P, q).transpose();
      H += eta1 * a * a.transpose();
      g += eta1 * b(k, i) * a;
    }
  }
  H.block(K, K, P, P) += eta * MatrixXd::Identity(P, P);
  g.segment(K, P) += eta * c;
  return H.fullPivLu().solve(g);
}

/// Random tiny design with rows (1, v_i, u_i).
inline MatrixXd random_rows(std::mt19937_64& rng, Index n, Index P, Index q, double v_scale = 1.0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd rows(n, 1 + P + q);
  for (Index i = 0; i < n; ++i) {
    rows(i, 0) = 1.0;
    for (Index j = 0; j < P; ++j) rows(i, 1 + j) = v_scale * nd(rng);
    for (Index j = 0; j < q; ++j) rows(i, 1 + P + j) = nd(rng);
  }
  return rows;
}

inline VectorXd random_vector(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

}  // namespace oracle

namespace fixture {

inline wavecqr::Design make_design(const Eigen::MatrixXd& rows, Eigen::Index m, Eigen::Index N, Eigen::Index q) {
  wavecqr::Design d;
  d.rows = rows;
  d.m = m;
  d.grid_len = N;
  d.q = q;
  return d;
}

}  // namespace fixture
