#include "wavecqr/admm.hpp"

#include "wavecqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace wavecqr {

void SolverConfig::validate() const {
  if (!(eta > 0.0) || !(eta1 > 0.0)) throw ParameterError("eta and eta1 must be positive");
  if (!(eps_abs > 0.0) || !(eps_rel > 0.0) || !(inner_eps_abs > 0.0) || !(inner_eps_rel > 0.0)) {
    throw ParameterError("tolerances must be positive");
  }
  if (max_outer < 1 || max_inner < 1) throw ParameterError("iteration limits must be >= 1");
}

StoppingThresholds stopping_thresholds(const VectorXd& theta, const VectorXd& theta_sparse, const VectorXd& w,
                                       Index q, Index K, const SolverConfig& cfg) {
  const double mn = static_cast<double>(theta.size());
  StoppingThresholds t;
  t.primal = std::sqrt(mn) * cfg.eps_abs + cfg.eps_rel * std::max(theta.norm(), theta_sparse.norm());
  t.dual = std::sqrt(mn + static_cast<double>(q + K)) * cfg.eps_abs + cfg.eps_rel * w.norm();
  return t;
}

std::vector<Index> FitResult::support_blocks() const {
  std::vector<Index> out;
  for (Index l = 0; l < params.m; ++l) {
    if ((params.block(l).array() != 0.0).any()) out.push_back(l);
  }
  return out;
}

Index FitResult::support_size() const { return (params.theta.array() != 0.0).count(); }

namespace {

struct InnerState {
  MatrixXd r;
  MatrixXd z;
  QuadraticStep::Fitted last;
  int iterations = 0;
  bool converged = false;
};

// Inner ADMM on the splitting y - fitted = r with anchor c = theta* - w.
// `vc` is V*c.
void run_inner(const QuadraticStep& step, const VectorXd& y, const QuantileLevels& taus, const VectorXd& vc,
               const SolverConfig& cfg, InnerState& st) {
  const Index K = taus.size();
  const Index n = y.size();
  const double eta1 = cfg.eta1;
  const double eps_abs = cfg.inner_eps_abs;
  const double eps_rel = cfg.inner_eps_rel;
  const double scale_abs = std::sqrt(static_cast<double>(K * n)) * eps_abs;
  const double y_norm = std::sqrt(static_cast<double>(K)) * y.norm();
  MatrixXd b(K, n);
  MatrixXd fitted(K, n);
  MatrixXd r_old;
  st.iterations = 0;
  st.converged = false;
  for (int it = 0; it < cfg.max_inner; ++it) {
    b = (st.z - st.r).rowwise() + y.transpose();
    st.last = step.solve_fitted(b, vc);
    for (Index k = 0; k < K; ++k) {
      fitted.row(k) = (st.last.shared.array() + st.last.offsets(k)).transpose();
    }
    r_old = st.r;
    double primal_sq = 0.0;
    for (Index k = 0; k < K; ++k) {
      const double tau = taus[k];
      for (Index i = 0; i < n; ++i) {
        const double resid = y(i) - fitted(k, i);
        const double rk = prox_check(resid + st.z(k, i), tau, eta1);
        st.r(k, i) = rk;
        const double gap = resid - rk;
        st.z(k, i) += gap;
        primal_sq += gap * gap;
      }
    }
    ++st.iterations;
    const double primal = std::sqrt(primal_sq);
    const double dual = eta1 * (st.r - r_old).norm();
    const double tol_p = scale_abs + eps_rel * std::max({fitted.norm(), st.r.norm(), y_norm});
    const double tol_d = scale_abs + eps_rel * eta1 * st.z.norm();
    if (primal <= tol_p && dual <= tol_d) {
      st.converged = true;
      break;
    }
  }
}

CoefficientSet assemble(const QuadraticStep& step, const QuadraticStep::Fitted& f, const VectorXd& c) {
  const Design& d = step.design();
  CoefficientSet out;
  out.m = d.m;
  out.grid_len = d.grid_len;
  out.alpha = f.offsets.array() + f.scalar_coef(0);
  out.gamma = f.scalar_coef.tail(d.q);
  out.theta = step.theta_from(c, f.direction);
  return out;
}

VectorXd apply_sgl_prox(const VectorXd& x, Index grid_len, double t1, double t2) {
  VectorXd out(x.size());
  for (Index start = 0; start < x.size(); start += grid_len) {
    out.segment(start, grid_len) = prox_sgl_block(x.segment(start, grid_len), t1, t2);
  }
  return out;
}

}  // namespace

InnerResult inner_quantile_step(const QuadraticStep& step, const VectorXd& y, const QuantileLevels& taus,
                                const VectorXd& theta_anchor, const VectorXd& w, const SolverConfig& cfg,
                                const MatrixXd& r0, const MatrixXd& z0) {
  cfg.validate();
  const Design& d = step.design();
  const Index K = taus.size();
  if (step.levels() != K) throw DimensionError("quadratic step was built for a different level count");
  if (y.size() != d.n()) throw DimensionError("response length differs from design rows");
  if (theta_anchor.size() != d.theta_size() || w.size() != d.theta_size()) {
    throw DimensionError("anchor and dual must have length m*N");
  }
  InnerState st;
  st.r = r0.size() == 0 ? MatrixXd::Zero(K, d.n()) : r0;
  st.z = z0.size() == 0 ? MatrixXd::Zero(K, d.n()) : z0;
  if (st.r.rows() != K || st.r.cols() != d.n() || st.z.rows() != K || st.z.cols() != d.n()) {
    throw DimensionError("initial r and z must be K x n");
  }
  const VectorXd c = theta_anchor - w;
  VectorXd vc;
  if (d.theta_size() > 0) vc = d.wavelet_block() * c;
  run_inner(step, y, taus, vc, cfg, st);
  InnerResult out;
  out.params = assemble(step, st.last, c);
  out.r = std::move(st.r);
  out.z = std::move(st.z);
  out.iterations = st.iterations;
  out.converged = st.converged;
  return out;
}

AdmmSolver::AdmmSolver(const Design& design, const VectorXd& y, const QuantileLevels& taus, SolverConfig cfg)
    : design_(&design),
      y_(&y),
      taus_(taus),
      cfg_(cfg),
      step_((cfg.validate(), design), taus.size(), cfg.eta, cfg.eta1) {
  if (y.size() != design.n()) throw DimensionError("response length differs from design rows");
}

FitResult AdmmSolver::fit(const PenaltySpec& pen, const FitResult* warm) const {
  pen.validate();
  const Design& d = *design_;
  const VectorXd& y = *y_;
  const Index K = taus_.size();
  const Index n = d.n();
  const Index P = d.theta_size();
  const Index N = d.grid_len;
  const double eta = cfg_.eta;
  const double t1 = pen.lambda1 / eta;
  const double t2 = pen.lambda2 / eta;

  VectorXd theta_sparse = VectorXd::Zero(P);
  VectorXd w = VectorXd::Zero(P);
  InnerState st;
  st.r = MatrixXd::Zero(K, n);
  st.z = MatrixXd::Zero(K, n);
  if (warm != nullptr && warm->params.theta.size() == P && warm->inner_r.rows() == K &&
      warm->inner_r.cols() == n) {
    theta_sparse = warm->params.theta;
    w = warm->dual;
    st.r = warm->inner_r;
    st.z = warm->inner_z;
  }

  FitResult out;
  VectorXd theta(P);
  VectorXd theta_prev_sparse;
  VectorXd vc;
  CoefficientSet current;
  double last_merit = 0.0;
  bool have_merit = false;

  for (int outer = 1; outer <= cfg_.max_outer; ++outer) {
    const VectorXd c = theta_sparse - w;
    if (P > 0) vc = d.wavelet_block() * c;
    if (!cfg_.warm_start) {
      st.r.setZero();
      st.z.setZero();
    }
    run_inner(step_, y, taus_, vc, cfg_, st);
    out.inner_iters_total += st.iterations;
    current = assemble(step_, st.last, c);
    theta = current.theta;

    theta_prev_sparse = theta_sparse;
    if (P > 0) theta_sparse = apply_sgl_prox(theta + w, N, t1, t2);
    const VectorXd gap = theta - theta_sparse;
    w += gap;

    out.primal_residual = gap.norm();
    out.dual_residual = eta * (theta_sparse - theta_prev_sparse).norm();
    out.thresholds = stopping_thresholds(theta, theta_sparse, w, d.q, K, cfg_);
    out.outer_iters = outer;

    // Augmented Lagrangian at the new iterate; the inner fit values are exact
    // for (alpha, gamma, theta).
    double loss = 0.0;
    for (Index k = 0; k < K; ++k) {
      const double tau = taus_[k];
      const double off = st.last.offsets(k);
      for (Index i = 0; i < n; ++i) loss += check_loss(y(i) - st.last.shared(i) - off, tau);
    }
    const double merit = loss + sgl_penalty(theta_sparse, N, pen) + eta * w.dot(gap) + 0.5 * eta * gap.squaredNorm();
    if (have_merit && merit - last_merit > 1e-3 * (1.0 + std::abs(last_merit))) ++out.merit_increases;
    last_merit = merit;
    have_merit = true;

    if (cfg_.trace != nullptr) {
      CoefficientSet at_sparse = current;
      at_sparse.theta = theta_sparse;
      *cfg_.trace << "{\"iter\":" << outer << ",\"objective\":" << objective(at_sparse, d, y, taus_, pen)
                  << ",\"primal\":" << out.primal_residual << ",\"dual\":" << out.dual_residual << "}\n";
    }

    if (st.converged && out.primal_residual <= out.thresholds.primal &&
        out.dual_residual <= out.thresholds.dual) {
      out.converged = true;
      break;
    }
  }

  out.params = std::move(current);
  out.params.theta = theta_sparse;
  out.theta_dense = theta;
  out.dual = w;
  out.inner_r = std::move(st.r);
  out.inner_z = std::move(st.z);
  out.objective = objective(out.params, d, y, taus_, pen);
  return out;
}

FitResult fit(const Design& design, const VectorXd& y, const QuantileLevels& taus, const PenaltySpec& pen,
              const SolverConfig& cfg) {
  AdmmSolver solver(design, y, taus, cfg);
  return solver.fit(pen);
}

double kkt_residual(const CoefficientSet& params, const Design& design, const VectorXd& y,
                    const QuantileLevels& taus, const PenaltySpec& pen, double zero_tol) {
  pen.validate();
  const Index K = taus.size();
  check_dimensions(params, design, K);
  const Index n = design.n();
  const Index q = design.q;
  const Index P = design.theta_size();
  const Index N = design.grid_len;

  VectorXd shared = VectorXd::Zero(n);
  if (P > 0) shared.noalias() += design.wavelet_block() * params.theta;
  if (q > 0) shared.noalias() += design.scalar_block() * params.gamma;

  // Fixed subgradient values and the free (zero-residual) entries with their boxes.
  MatrixXd psi(K, n);
  struct Free {
    Index k, i;
    double lo, hi;
  };
  std::vector<Free> free;
  for (Index k = 0; k < K; ++k) {
    const double tau = taus[k];
    for (Index i = 0; i < n; ++i) {
      const double r = y(i) - params.alpha(k) - shared(i);
      if (r > zero_tol) {
        psi(k, i) = tau;
      } else if (r < -zero_tol) {
        psi(k, i) = tau - 1.0;
      } else {
        psi(k, i) = tau - 0.5;
        free.push_back({k, i, tau - 1.0, tau});
      }
    }
  }

  const VectorXd theta_norms = [&] {
    VectorXd norms(design.m);
    for (Index l = 0; l < design.m; ++l) norms(l) = params.block(l).norm();
    return norms;
  }();

  // Residual pieces as a function of psi. Gradient of the objective:
  //   d/d alpha_k = -sum_i psi_ki, d/d gamma = -U' s, d/d theta = -V' s + dP,
  // with s_i = sum_k psi_ki. For theta we take the distance to -dP(theta).
  VectorXd ra(K), rg(q), rt(P);
  auto residual = [&](const MatrixXd& ps) {
    const VectorXd s = ps.colwise().sum().transpose();
    ra = -ps.rowwise().sum();
    if (q > 0) rg = -(design.scalar_block().transpose() * s);
    if (P == 0) return;
    const VectorXd g = -(design.wavelet_block().transpose() * s);
    for (Index l = 0; l < design.m; ++l) {
      const auto gl = g.segment(l * N, N);
      auto out = rt.segment(l * N, N);
      const auto bl = params.block(l);
      if (theta_norms(l) > 0.0) {
        for (Index j = 0; j < N; ++j) {
          if (bl(j) != 0.0) {
            out(j) = gl(j) + pen.lambda1 * (bl(j) > 0.0 ? 1.0 : -1.0) + pen.lambda2 * bl(j) / theta_norms(l);
          } else {
            const double mag = std::abs(gl(j)) - pen.lambda1;
            out(j) = mag > 0.0 ? std::copysign(mag, gl(j)) : 0.0;
          }
        }
      } else {
        const VectorXd sg = soft_threshold(gl, pen.lambda1);
        const double norm = sg.norm();
        out = norm > pen.lambda2 ? VectorXd(sg * (1.0 - pen.lambda2 / norm)) : VectorXd::Zero(N);
      }
    }
  };
  auto total_norm = [&] { return std::sqrt(ra.squaredNorm() + rg.squaredNorm() + rt.squaredNorm()); };

  residual(psi);
  if (free.empty()) return total_norm();

  // Projected accelerated gradient on 0.5*||R(psi_free)||^2 over the boxes.
  double lipschitz = 0.0;
  for (const auto& f : free) {
    lipschitz += 1.0 + design.rows.row(f.i).tail(P + q).squaredNorm();
  }
  const double step = 1.0 / lipschitz;
  const Index F = static_cast<Index>(free.size());
  VectorXd x(F), x_prev(F), yv(F);
  for (Index j = 0; j < F; ++j) x(j) = psi(free[j].k, free[j].i);
  x_prev = x;
  double best = total_norm();
  double momentum = 1.0;
  int stalled = 0;
  MatrixXd work = psi;
  for (int it = 0; it < 5000 && stalled < 200; ++it) {
    const double next_m = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    yv = x + ((momentum - 1.0) / next_m) * (x - x_prev);
    momentum = next_m;
    for (Index j = 0; j < F; ++j) work(free[j].k, free[j].i) = yv(j);
    residual(work);
    x_prev = x;
    for (Index j = 0; j < F; ++j) {
      const auto& f = free[j];
      double grad = -ra(f.k);
      if (q > 0) grad -= design.scalar_block().row(f.i).dot(rg);
      if (P > 0) grad -= design.wavelet_block().row(f.i).dot(rt);
      x(j) = std::clamp(yv(j) - step * grad, f.lo, f.hi);
    }
    for (Index j = 0; j < F; ++j) work(free[j].k, free[j].i) = x(j);
    residual(work);
    const double now = total_norm();
    if (now < best * (1.0 - 1e-9)) {
      best = now;
      stalled = 0;
    } else {
      ++stalled;
    }
    if (best < 1e-14) break;
  }
  return best;
}

}  // namespace wavecqr
