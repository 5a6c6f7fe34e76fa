#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lyap/model.hpp"
#include "lyap/sde.hpp"

namespace lyap {

/// Point of the lifted process: base state, unit tangent direction, and the
/// accumulated log growth of the tangent vector.
struct ProjectiveState {
  Eigen::VectorXd x;
  Eigen::VectorXd v;
  double log_growth = 0;
};

struct LiftedField {
  Eigen::VectorXd base;    // component along R^n
  Eigen::VectorXd sphere;  // component tangent to S^{n-1} at v
};

namespace detail {
inline void require_unit(const Eigen::VectorXd& v) {
  if (v.norm() == 0) throw std::invalid_argument("projective: zero tangent vector");
  if (std::abs(v.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("projective: tangent vector must be unit length");
}
}  // namespace detail

/// Lift of the drift to the sphere bundle: (X0(x), (I - vv^T) grad X0(x) v).
inline LiftedField lift_field(const BilinearModel& m, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v) {
  detail::require_unit(v);
  if (x.size() != m.dim()) throw std::invalid_argument("lift_field: dimension mismatch");
  LiftedField out;
  out.base = m.drift(x);
  Eigen::VectorXd Jv(m.dim());
  m.jacobian_apply_into(x.data(), v.data(), Jv.data());
  out.sphere = Jv - v.dot(Jv) * v;
  return out;
}

/// Constant (additive) fields lift with a vanishing sphere component.
inline LiftedField lift_constant_field(const Eigen::VectorXd& field, const Eigen::VectorXd& v) {
  detail::require_unit(v);
  return {field, Eigen::VectorXd::Zero(v.size())};
}

namespace detail {

/// Explicit-midpoint propagator for the frozen-coefficient tangent equation
/// u' = J(x) u over one step: u <- u + dt J (u + dt/2 J u).
class TangentPropagator {
 public:
  explicit TangentPropagator(const BilinearModel& m) : model_(&m), w1_(m.dim()), w2_(m.dim()) {}

  void apply(const double* x, Eigen::VectorXd& u, double dt) {
    model_->jacobian_apply_into(x, u.data(), w1_.data());
    w2_ = u + (0.5 * dt) * w1_;
    model_->jacobian_apply_into(x, w2_.data(), w1_.data());
    u += dt * w1_;
  }

 private:
  const BilinearModel* model_;
  Eigen::VectorXd w1_, w2_;
};

}  // namespace detail

/// One step of the lifted process with caller-supplied noise increments
/// (sqrt(dt)-scaled, one per forcing stream). The base point advances by the
/// SDE scheme; the tangent direction advances by the frozen-coefficient linear
/// flow on the same grid (additive noise leaves the tangent equation
/// noise-free given the base path) and is renormalized, accumulating the log
/// of the pre-normalization length.
inline ProjectiveState step_projective(const BilinearModel& m, const ProjectiveState& state,
                                       double dt, const std::vector<double>& noise,
                                       Scheme scheme = Scheme::EulerMaruyama) {
  detail::require_unit(state.v);
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.T = 2 * dt;
  cfg.scheme = scheme;
  Stepper base(m, state.x, cfg);
  ProjectiveState next;
  next.v = state.v;
  detail::TangentPropagator prop(m);
  prop.apply(state.x.data(), next.v, dt);
  base.advance_with_noise(noise);
  next.x = base.state();
  const double len = next.v.norm();
  if (!(len > 0) || !std::isfinite(len))
    throw BlowupError(dt, "tangent vector degenerated");
  next.v /= len;
  next.log_growth = state.log_growth + std::log(len);
  return next;
}

/// Result of a single projective run (one seed).
struct ProjectiveRunResult {
  double exponent = 0;     // log growth per unit time after burn-in
  double log_growth = 0;   // accumulated after burn-in
  double T_effective = 0;  // averaging window
  ProjectiveState final_state;
  std::vector<double> series_times;      // optional running estimate
  std::vector<double> series_estimates;
};

struct ProjectiveRunOptions {
  int renorm_every = 1;          // normalization cadence in steps
  std::int64_t series_stride = 0;  // 0 disables the running series
  Eigen::VectorXd v0;            // empty selects e_1
};

/// Integrates the lifted process along one noise path and returns the
/// time-averaged log growth after burn-in. The tangent vector is propagated
/// linearly and renormalized every `renorm_every` steps; the estimate is
/// invariant to the cadence up to rounding.
inline ProjectiveRunResult run_projective(const BilinearModel& m, const Eigen::VectorXd& x0,
                                          const IntegratorConfig& cfg,
                                          const ProjectiveRunOptions& opts = {}) {
  cfg.validate();
  if (opts.renorm_every < 1)
    throw std::invalid_argument("run_projective: renorm cadence must be >= 1");
  const std::int64_t steps = step_count(cfg);
  const std::int64_t burn_steps =
      static_cast<std::int64_t>(std::llround(cfg.effective_burn_in() / cfg.dt));

  Stepper base(m, x0, cfg);
  Eigen::VectorXd u = opts.v0.size() ? opts.v0 : Eigen::VectorXd::Unit(m.dim(), 0);
  if (u.size() != m.dim()) throw std::invalid_argument("run_projective: v0 dimension mismatch");
  u /= u.norm();
  detail::TangentPropagator prop(m);

  ProjectiveRunResult out;
  double log_acc = 0;
  auto flush = [&]() {
    // accumulate |u| into the log and renormalize
    const double len = u.norm();
    if (!(len > 0) || !std::isfinite(len)) throw BlowupError(base.time(), "tangent degenerated");
    log_acc += std::log(len);
    u /= len;
  };
  for (std::int64_t s = 0; s < steps; ++s) {
    prop.apply(base.state().data(), u, cfg.dt);
    base.advance();
    const double sq = u.squaredNorm();
    const bool out_of_range = !(sq > 1e-200) || sq > 1e200 || !std::isfinite(sq);
    if ((s + 1) % opts.renorm_every == 0 || out_of_range) flush();
    if (s + 1 == burn_steps) {
      flush();
      log_acc = 0;  // discard the burn-in growth
    }
    if (opts.series_stride > 0 && (s + 1) % opts.series_stride == 0 && s + 1 > burn_steps) {
      const double t_eff = static_cast<double>(s + 1 - burn_steps) * cfg.dt;
      const double len = u.norm();
      out.series_times.push_back(base.time());
      out.series_estimates.push_back((log_acc + std::log(len)) / t_eff);
    }
  }
  flush();
  out.T_effective = static_cast<double>(steps - burn_steps) * cfg.dt;
  out.log_growth = log_acc;
  out.exponent = log_acc / out.T_effective;
  out.final_state = {base.state(), u, log_acc};
  return out;
}

/// Frame state of the spectrum runner: base point, orthonormal frame, and the
/// per-vector accumulated log growth.
struct SpectrumState {
  Eigen::VectorXd x;
  Eigen::MatrixXd Q;
  Eigen::VectorXd log_diag;
};

struct SpectrumOptions {
  int reorth_every = 10;         // QR cadence in steps
  double condition_trigger = 1e6;  // column-norm ratio forcing an early QR
  std::int64_t series_stride = 0;
};

struct SpectrumResult {
  std::vector<double> exponents;  // leading m_vectors exponents, descending
  double lambda_sum = 0;          // sum of the computed exponents
  double T_effective = 0;
  SpectrumState final_state;
  std::vector<double> series_times;
  std::vector<std::vector<double>> series_estimates;  // per time, per vector
};

/// Leading Lyapunov exponents by periodic reorthonormalization: the frame is
/// advanced by the Jacobian flow along one noise path and QR-factorized every
/// reorth_every steps; log |R_ii| accumulates per vector. With m_vectors = n
/// the sum recovers the volume growth rate -eps tr A.
inline SpectrumResult qr_spectrum(const BilinearModel& m, const Eigen::VectorXd& x0,
                                  const IntegratorConfig& cfg, int m_vectors,
                                  const SpectrumOptions& opts = {}) {
  cfg.validate();
  const int n = m.dim();
  if (m_vectors < 1 || m_vectors > n)
    throw std::invalid_argument("qr_spectrum: need 1 <= m_vectors <= n");
  const std::int64_t steps = step_count(cfg);
  const std::int64_t burn_steps =
      static_cast<std::int64_t>(std::llround(cfg.effective_burn_in() / cfg.dt));

  Stepper base(m, x0, cfg);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, m_vectors);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m_vectors);
  detail::TangentPropagator prop(m);
  Eigen::VectorXd col(n);

  SpectrumResult out;
  auto reorthonormalize = [&]() {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
    Eigen::MatrixXd thinQ = qr.householderQ() * Eigen::MatrixXd::Identity(n, m_vectors);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(m_vectors).triangularView<Eigen::Upper>();
    for (int i = 0; i < m_vectors; ++i) {
      const double rii = R(i, i);
      if (!(std::abs(rii) > 1e-300) || !std::isfinite(rii))
        throw std::runtime_error("qr_spectrum: frame degeneracy before reorthonormalization");
      acc[i] += std::log(std::abs(rii));
      if (rii < 0) thinQ.col(i) = -thinQ.col(i);
    }
    Q = thinQ;
  };

  for (std::int64_t s = 0; s < steps; ++s) {
    for (int c = 0; c < m_vectors; ++c) {
      col = Q.col(c);
      prop.apply(base.state().data(), col, cfg.dt);
      Q.col(c) = col;
    }
    base.advance();
    bool do_qr = (s + 1) % opts.reorth_every == 0 || s + 1 == steps || s + 1 == burn_steps;
    if (!do_qr && opts.condition_trigger > 0) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0;
      for (int c = 0; c < m_vectors; ++c) {
        const double nc = Q.col(c).norm();
        lo = std::min(lo, nc);
        hi = std::max(hi, nc);
      }
      do_qr = !(lo > 0) || hi / lo > opts.condition_trigger;
    }
    if (do_qr) reorthonormalize();
    if (s + 1 == burn_steps) acc.setZero();
    if (opts.series_stride > 0 && (s + 1) % opts.series_stride == 0 && s + 1 > burn_steps) {
      const double t_eff = static_cast<double>(s + 1 - burn_steps) * cfg.dt;
      out.series_times.push_back(base.time());
      std::vector<double> row(m_vectors);
      for (int i = 0; i < m_vectors; ++i) row[i] = acc[i] / t_eff;
      out.series_estimates.push_back(std::move(row));
    }
  }

  out.T_effective = static_cast<double>(steps - burn_steps) * cfg.dt;
  out.exponents.resize(m_vectors);
  for (int i = 0; i < m_vectors; ++i) {
    out.exponents[i] = acc[i] / out.T_effective;
    out.lambda_sum += out.exponents[i];
  }
  out.final_state = {base.state(), Q, acc};
  return out;
}

// ---- Furstenberg-Khasminskii integrands ----

struct FKIntegrands {
  double Q = 0;       // div X0(x)
  double Qtilde = 0;  // divergence of the lifted drift on the sphere bundle
};

/// Q(x) = div X0(x); for Euler-like drifts this is the constant -eps tr A.
/// Qtilde adds the sphere divergence of v -> (I - vv^T) M v with M = grad
/// X0(x), in the closed form tr M - n <v, M v>. Constant forcing fields lift
/// with zero sphere component and contribute nothing. The closed form is
/// gated by a finite-difference divergence oracle in the test suite.
inline FKIntegrands fk_integrands(const BilinearModel& m, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v) {
  detail::require_unit(v);
  if (x.size() != m.dim()) throw std::invalid_argument("fk_integrands: dimension mismatch");
  FKIntegrands out;
  out.Q = m.drift_divergence(x);
  Eigen::VectorXd Mv(m.dim());
  m.jacobian_apply_into(x.data(), v.data(), Mv.data());
  const double trace_M = out.Q;  // tr grad X0 = div X0
  out.Qtilde = out.Q + trace_M - static_cast<double>(m.dim()) * v.dot(Mv);
  return out;
}

/// Sphere divergence of v -> (I - vv^T) M v for an arbitrary square matrix M;
/// the same closed form, exposed for oracle tests.
inline double sphere_divergence(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
  detail::require_unit(v);
  return M.trace() - static_cast<double>(v.size()) * v.dot(M * v);
}

// ---- deterministic shear lower bound ----

struct ShearSample {
  double t = 0;
  double op_norm = 0;        // ||D_x Phi^t||
  double rhs = 0;            // t |B(Phi^t x, Phi^t x)| / |x|
  bool satisfied = false;
  double decomposition_residual = 0;  // |D Phi^t x - Phi^t x - t B(Phi^t x, Phi^t x)|
};

struct ShearReport {
  std::vector<ShearSample> samples;
  bool all_satisfied = true;
  double max_residual = 0;
};

namespace detail {

/// One RK4 step of the coupled system x' = f(x), J' = Df(x) J.
inline void rk4_flow_jacobian_step(const BilinearModel& m, Eigen::VectorXd& x, Eigen::MatrixXd& J,
                                   double dt) {
  const int n = m.dim();
  const auto apply_df = [&](const Eigen::VectorXd& at, const Eigen::MatrixXd& Z) {
    Eigen::MatrixXd out(n, Z.cols());
    Eigen::VectorXd col(n);
    for (int c = 0; c < Z.cols(); ++c) {
      col = Z.col(c);
      Eigen::VectorXd res(n);
      m.jacobian_apply_into(at.data(), col.data(), res.data());
      out.col(c) = res;
    }
    return out;
  };
  const Eigen::VectorXd k1 = m.drift(x);
  const Eigen::MatrixXd K1 = apply_df(x, J);
  const Eigen::VectorXd x2 = x + 0.5 * dt * k1;
  const Eigen::VectorXd k2 = m.drift(x2);
  const Eigen::MatrixXd K2 = apply_df(x2, J + 0.5 * dt * K1);
  const Eigen::VectorXd x3 = x + 0.5 * dt * k2;
  const Eigen::VectorXd k3 = m.drift(x3);
  const Eigen::MatrixXd K3 = apply_df(x3, J + 0.5 * dt * K2);
  const Eigen::VectorXd x4 = x + dt * k3;
  const Eigen::VectorXd k4 = m.drift(x4);
  const Eigen::MatrixXd K4 = apply_df(x4, J + dt * K3);
  x += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  J += (dt / 6.0) * (K1 + 2 * K2 + 2 * K3 + K4);
}

}  // namespace detail

/// Deterministic flow map of the eps = 0 system by classical RK4 (noise is
/// ignored; only the drift enters).
inline Eigen::VectorXd flow_map(const BilinearModel& m, const Eigen::VectorXd& x0, double T,
                                double dt) {
  Eigen::VectorXd x = x0;
  const std::int64_t steps = static_cast<std::int64_t>(std::llround(T / dt));
  for (std::int64_t s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = m.drift(x);
    const Eigen::VectorXd k2 = m.drift((x + 0.5 * dt * k1).eval());
    const Eigen::VectorXd k3 = m.drift((x + 0.5 * dt * k2).eval());
    const Eigen::VectorXd k4 = m.drift((x + dt * k3).eval());
    x += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

/// Verifies, along the conservative eps = 0 flow, the orthogonal decomposition
/// D_x Phi^t x = Phi^t(x) + t B(Phi^t x, Phi^t x) and the operator-norm lower
/// bound ||D_x Phi^t|| >= t |B(Phi^t x, Phi^t x)| / |x| at each sample time.
inline ShearReport shear_bound_check(const BilinearModel& m, const Eigen::VectorXd& x0, double T,
                                     double dt = 1e-4, int n_samples = 50) {
  if (m.epsilon() != 0)
    throw std::invalid_argument("shear_bound_check: requires the eps = 0 conservative flow");
  if (x0.norm() == 0) throw std::invalid_argument("shear_bound_check: x0 must be nonzero");
  if (x0.size() != m.dim()) throw std::invalid_argument("shear_bound_check: dimension mismatch");

  const std::int64_t steps = static_cast<std::int64_t>(std::llround(T / dt));
  const std::int64_t sample_every = std::max<std::int64_t>(1, steps / n_samples);
  Eigen::VectorXd x = x0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(m.dim(), m.dim());
  ShearReport report;
  Eigen::VectorXd bxx(m.dim());
  for (std::int64_t s = 1; s <= steps; ++s) {
    detail::rk4_flow_jacobian_step(m, x, J, dt);
    if (s % sample_every == 0 || s == steps) {
      const double t = static_cast<double>(s) * dt;
      ShearSample sample;
      sample.t = t;
      m.bilinear().eval_quadratic(x.data(), bxx.data());
      sample.rhs = t * bxx.norm() / x0.norm();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
      sample.op_norm = svd.singularValues()[0];
      sample.satisfied = sample.op_norm >= sample.rhs * (1.0 - 1e-9);
      sample.decomposition_residual = (J * x0 - x - t * bxx).norm();
      report.all_satisfied = report.all_satisfied && sample.satisfied;
      report.max_residual = std::max(report.max_residual, sample.decomposition_residual);
      report.samples.push_back(sample);
    }
  }
  return report;
}

}  // namespace lyap
