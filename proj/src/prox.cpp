#include "wavecqr/prox.hpp"

#include "wavecqr/errors.hpp"

#include <cmath>

namespace wavecqr {

double prox_check(double c, double tau, double eta1) {
  if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("prox_check needs tau in (0,1)");
  if (!(eta1 > 0.0)) throw ParameterError("prox_check needs eta1 > 0");
  const double upper = tau / eta1;
  const double lower = (1.0 - tau) / eta1;
  if (c > upper) return c - upper;
  if (c < -lower) return c + lower;
  return 0.0;
}

VectorXd soft_threshold(const VectorXd& v, double t) {
  if (!(t >= 0.0)) throw ParameterError("soft threshold must be nonnegative");
  VectorXd out(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const double mag = std::abs(v(j)) - t;
    out(j) = mag > 0.0 ? std::copysign(mag, v(j)) : 0.0;
  }
  return out;
}

VectorXd prox_sgl_block(const VectorXd& c, double t1, double t2) {
  if (!(t2 >= 0.0)) throw ParameterError("group threshold must be nonnegative");
  VectorXd v = soft_threshold(c, t1);
  const double norm = v.norm();
  if (norm <= t2) return VectorXd::Zero(c.size());
  v *= (norm - t2) / norm;
  return v;
}

QuadraticStep::QuadraticStep(const Design& design, Index levels, double eta, double eta1)
    : design_(&design), levels_(levels), eta_(eta), eta1_(eta1) {
  if (!(eta > 0.0) || !(eta1 > 0.0)) throw ParameterError("eta and eta1 must be positive");
  if (levels < 1) throw ParameterError("need at least one quantile level");
  rho_ = eta / (static_cast<double>(levels) * eta1);
  const Index n = design.n();
  const Index q = design.q;

  scalar_cols_.resize(n, 1 + q);
  scalar_cols_.col(0).setOnes();
  if (q > 0) scalar_cols_.rightCols(q) = design.scalar_block();

  if (design.theta_size() > 0) {
    MatrixXd h = MatrixXd::Identity(n, n) * rho_;
    const auto v = design.wavelet_block();
    h.selfadjointView<Eigen::Lower>().rankUpdate(v);
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
    gram_.compute(h);
    if (gram_.info() != Eigen::Success) {
      throw SolverError("quadratic step: wavelet Gram block is not positive definite");
    }
  }
  g_scalar_ = solve_gram(scalar_cols_);
  const MatrixXd s = scalar_cols_.transpose() * g_scalar_;
  schur_.compute(s);
  const double rcond = schur_.info() == Eigen::Success ? schur_.rcond() : 0.0;
  if (!(rcond > 1e-13)) {
    throw SolverError(
        "quadratic step: singular system in the unpenalized block [intercept, u_1..u_" +
        std::to_string(q) + "] (collinear or duplicate constant columns)");
  }
}

MatrixXd QuadraticStep::solve_gram(const MatrixXd& rhs) const {
  if (design_->theta_size() == 0) return rhs / rho_;
  return gram_.solve(rhs);
}

QuadraticStep::Fitted QuadraticStep::solve_fitted(const MatrixXd& b, const VectorXd& vc) const {
  const Index n = design_->n();
  const Index K = levels_;
  Fitted out;
  const VectorXd bbar = b.colwise().mean().transpose();
  out.offsets.resize(K);
  for (Index k = 0; k < K; ++k) out.offsets(k) = (b.row(k).transpose() - bbar).mean();

  VectorXd e = bbar;
  if (vc.size() == n) e -= vc;
  const VectorXd ge = solve_gram(e);
  out.scalar_coef = schur_.solve(scalar_cols_.transpose() * ge);
  out.direction = ge - g_scalar_ * out.scalar_coef;
  out.shared = bbar - rho_ * out.direction;
  return out;
}

VectorXd QuadraticStep::theta_from(const VectorXd& c, const VectorXd& direction) const {
  if (design_->theta_size() == 0) return VectorXd(0);
  VectorXd theta = c;
  theta.noalias() += design_->wavelet_block().transpose() * direction;
  return theta;
}

CoefficientSet QuadraticStep::solve(const MatrixXd& b, const VectorXd& anchor) const {
  const Design& d = *design_;
  if (b.rows() != levels_ || b.cols() != d.n()) throw DimensionError("target matrix must be K x n");
  if (anchor.size() != d.theta_size()) throw DimensionError("anchor length differs from m*N");
  VectorXd vc;
  if (d.theta_size() > 0) vc = d.wavelet_block() * anchor;
  const Fitted f = solve_fitted(b, vc);
  CoefficientSet out;
  out.m = d.m;
  out.grid_len = d.grid_len;
  out.alpha = f.offsets.array() + f.scalar_coef(0);
  out.gamma = f.scalar_coef.tail(d.q);
  out.theta = theta_from(anchor, f.direction);
  return out;
}

CoefficientSet solve_quadratic_step(const Design& design, const VectorXd& y, const QuantileLevels& taus,
                                    const MatrixXd& r, const MatrixXd& z, const VectorXd& theta_anchor,
                                    const VectorXd& w, double eta, double eta1) {
  const Index K = taus.size();
  if (y.size() != design.n()) throw DimensionError("response length differs from design rows");
  if (r.rows() != K || r.cols() != design.n() || z.rows() != K || z.cols() != design.n()) {
    throw DimensionError("r and z must be K x n");
  }
  if (w.size() != theta_anchor.size()) throw DimensionError("w and anchor lengths differ");
  QuadraticStep step(design, K, eta, eta1);
  MatrixXd b = (-r + z).rowwise() + y.transpose();
  return step.solve(b, theta_anchor - w);
}

}  // namespace wavecqr
