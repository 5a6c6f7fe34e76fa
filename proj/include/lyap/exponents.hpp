#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyap/model.hpp"
#include "lyap/parallel.hpp"
#include "lyap/projective.hpp"
#include "lyap/sde.hpp"

namespace lyap {

struct ExponentEstimate {
  double value = 0;
  double stderr_ = 0;  // batch means across seeds; 0 for a single seed
  double T = 0;
  double dt = 0;
  int n_seeds = 0;
  int excluded_runs = 0;  // blown-up runs, excluded and flagged
  std::string model_fingerprint;
  std::vector<double> per_seed;
};

namespace detail {

inline ExponentEstimate summarize(std::vector<double> values, int excluded,
                                  const BilinearModel& m, const IntegratorConfig& cfg) {
  ExponentEstimate est;
  est.per_seed = values;
  est.n_seeds = static_cast<int>(values.size());
  est.excluded_runs = excluded;
  est.T = cfg.T;
  est.dt = cfg.dt;
  est.model_fingerprint = m.fingerprint();
  for (double v : values) est.value += v;
  est.value /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - est.value) * (v - est.value);
    est.stderr_ = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0) /
                            static_cast<double>(values.size()));
  }
  if (!std::isfinite(est.value)) throw std::runtime_error("exponent estimate is not finite");
  return est;
}

}  // namespace detail

/// Top Lyapunov exponent as the cross-seed mean of log growth / T after
/// burn-in. Blown-up runs are excluded and counted in excluded_runs; the call
/// fails only if every run blows up.
inline ExponentEstimate top_exponent(const BilinearModel& m, const IntegratorConfig& cfg,
                                     int n_seeds, int jobs = 1,
                                     const Eigen::VectorXd& x0_hint = {}) {
  if (n_seeds < 1) throw std::invalid_argument("top_exponent: need at least one seed");
  cfg.validate();
  const Eigen::VectorXd x0 =
      x0_hint.size() ? x0_hint : Eigen::VectorXd::Constant(m.dim(), 0.1);
  std::vector<std::optional<double>> slots(static_cast<std::size_t>(n_seeds));
  parallel_for(n_seeds, jobs, [&](std::int64_t i) {
    try {
      const auto run = run_projective(m, x0, cfg.with_seed(cfg.seed + static_cast<std::uint64_t>(i)));
      slots[static_cast<std::size_t>(i)] = run.exponent;
    } catch (const BlowupError&) {
      slots[static_cast<std::size_t>(i)] = std::nullopt;
    }
  });
  std::vector<double> values;
  int excluded = 0;
  for (const auto& s : slots)
    s ? values.push_back(*s) : void(++excluded);
  if (values.empty()) throw BlowupError(cfg.T, "top_exponent: every run blew up");
  return detail::summarize(std::move(values), excluded, m, cfg);
}

/// Cross-seed aggregate of qr_spectrum.
struct SpectrumEstimate {
  std::vector<double> exponents;
  std::vector<double> stderrs;
  double lambda_sum = 0;
  double lambda_sum_stderr = 0;
  double minus_eps_trA = 0;
  double T = 0, dt = 0;
  int n_seeds = 0;
  std::string model_fingerprint;
};

inline SpectrumEstimate lyapunov_spectrum(const BilinearModel& m, const IntegratorConfig& cfg,
                                          int m_vectors, int n_seeds, int jobs = 1,
                                          const Eigen::VectorXd& x0_hint = {}) {
  if (n_seeds < 1) throw std::invalid_argument("lyapunov_spectrum: need at least one seed");
  cfg.validate();
  const Eigen::VectorXd x0 =
      x0_hint.size() ? x0_hint : Eigen::VectorXd::Constant(m.dim(), 0.1);
  std::vector<std::vector<double>> per_seed(static_cast<std::size_t>(n_seeds));
  parallel_for(n_seeds, jobs, [&](std::int64_t i) {
    const auto res =
        qr_spectrum(m, x0, cfg.with_seed(cfg.seed + static_cast<std::uint64_t>(i)), m_vectors);
    per_seed[static_cast<std::size_t>(i)] = res.exponents;
  });
  SpectrumEstimate est;
  est.exponents.assign(m_vectors, 0.0);
  est.stderrs.assign(m_vectors, 0.0);
  est.n_seeds = n_seeds;
  est.T = cfg.T;
  est.dt = cfg.dt;
  est.minus_eps_trA = -m.epsilon() * m.trace_damping();
  est.model_fingerprint = m.fingerprint();
  std::vector<double> sums(static_cast<std::size_t>(n_seeds), 0.0);
  for (int i = 0; i < m_vectors; ++i) {
    for (int s = 0; s < n_seeds; ++s) est.exponents[i] += per_seed[s][i];
    est.exponents[i] /= n_seeds;
    if (n_seeds > 1) {
      double ss = 0;
      for (int s = 0; s < n_seeds; ++s)
        ss += (per_seed[s][i] - est.exponents[i]) * (per_seed[s][i] - est.exponents[i]);
      est.stderrs[i] = std::sqrt(ss / (n_seeds - 1.0) / n_seeds);
    }
    est.lambda_sum += est.exponents[i];
  }
  for (int s = 0; s < n_seeds; ++s)
    for (int i = 0; i < m_vectors; ++i) sums[s] += per_seed[s][i];
  if (n_seeds > 1) {
    double mean = est.lambda_sum, ss = 0;
    for (double v : sums) ss += (v - mean) * (v - mean);
    est.lambda_sum_stderr = std::sqrt(ss / (n_seeds - 1.0) / n_seeds);
  }
  return est;
}

struct SweepRow {
  double epsilon = 0;
  ExponentEstimate lambda1;
  double ratio = 0;         // lambda1 / epsilon
  double ratio_stderr = 0;
  double lambda_sum = 0;    // measured full-spectrum sum
  double minus_eps_trA = 0; // structural value it must match
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double trend_statistic = 0;  // ratio at the smallest eps minus ratio at the largest
  double trend_stderr = 0;
};

/// One row per damping value, descending. The ratio column feeds the
/// small-damping trend check; the volume rate is measured on a shorter
/// horizon since it is deterministic up to O(dt^2) scheme bias.
inline SweepResult epsilon_sweep(const BilinearModel& m, const std::vector<double>& eps_list,
                                 const IntegratorConfig& cfg, int n_seeds, int jobs = 1) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon_sweep: empty eps list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] <= 0) throw std::invalid_argument("epsilon_sweep: eps must be positive");
    if (i > 0 && eps_list[i] >= eps_list[i - 1])
      throw std::invalid_argument("epsilon_sweep: eps list must be descending");
  }
  SweepResult result;
  IntegratorConfig sum_cfg = cfg;
  sum_cfg.T = std::min(cfg.T, 2000.0);
  sum_cfg.burn_in = -1;
  for (const double eps : eps_list) {
    const auto model = m.with_epsilon(eps);
    SweepRow row;
    row.epsilon = eps;
    row.lambda1 = top_exponent(model, cfg, n_seeds, jobs);
    row.ratio = row.lambda1.value / eps;
    row.ratio_stderr = row.lambda1.stderr_ / eps;
    const auto spectrum = qr_spectrum(
        model, Eigen::VectorXd::Constant(model.dim(), 0.1), sum_cfg, model.dim());
    row.lambda_sum = spectrum.lambda_sum;
    row.minus_eps_trA = -eps * model.trace_damping();
    result.rows.push_back(std::move(row));
  }
  const auto& largest = result.rows.front();
  const auto& smallest = result.rows.back();
  result.trend_statistic = smallest.ratio - largest.ratio;
  result.trend_stderr = std::hypot(smallest.ratio_stderr, largest.ratio_stderr);
  return result;
}

struct MomentEstimate {
  double p = 0;
  double value = 0;   // Lambda(p)
  double stderr_ = 0; // delete-one jackknife over the ensemble
};

struct MomentResult {
  std::vector<MomentEstimate> estimates;
  int ensemble = 0;
  int excluded_runs = 0;
  double T_effective = 0;
};

/// Moment Lyapunov exponents Lambda(p) = (1/T) log mean |D phi^T v|^p over an
/// ensemble of independent paths, evaluated by log-sum-exp (finite growths
/// cannot overflow). Blown-up paths are excluded and counted.
inline MomentResult moment_lyapunov(const BilinearModel& m, const IntegratorConfig& cfg,
                                    const std::vector<double>& p_list, int ensemble,
                                    int jobs = 1) {
  if (ensemble < 100) throw std::invalid_argument("moment_lyapunov: ensemble must be >= 100");
  for (double p : p_list)
    if (!std::isfinite(p)) throw std::invalid_argument("moment_lyapunov: p must be finite");
  cfg.validate();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(m.dim(), 0.1);
  std::vector<std::optional<double>> growth(static_cast<std::size_t>(ensemble));
  double T_eff = 0;
  parallel_for(ensemble, jobs, [&](std::int64_t i) {
    try {
      const auto run = run_projective(m, x0, cfg.with_seed(cfg.seed + static_cast<std::uint64_t>(i)));
      growth[static_cast<std::size_t>(i)] = run.log_growth;
      if (i == 0) T_eff = run.T_effective;
    } catch (const BlowupError&) {
      growth[static_cast<std::size_t>(i)] = std::nullopt;
    }
  });
  std::vector<double> g;
  int excluded = 0;
  for (const auto& v : growth)
    v ? g.push_back(*v) : void(++excluded);
  if (g.size() < 2) throw BlowupError(cfg.T, "moment_lyapunov: ensemble collapsed");
  if (T_eff == 0) {
    IntegratorConfig probe = cfg;
    T_eff = probe.T - probe.effective_burn_in();
  }

  MomentResult out;
  out.ensemble = static_cast<int>(g.size());
  out.excluded_runs = excluded;
  out.T_effective = T_eff;
  const double N = static_cast<double>(g.size());
  for (const double p : p_list) {
    // log mean exp(p g_i) via the max trick; delete-one jackknife reuses the sums
    double mx = -std::numeric_limits<double>::infinity();
    for (double gi : g) mx = std::max(mx, p * gi);
    double total = 0;
    std::vector<double> terms(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      terms[i] = std::exp(p * g[i] - mx);
      total += terms[i];
    }
    if (!std::isfinite(total) || total <= 0)
      throw std::runtime_error("moment_lyapunov: overflow at p = " + std::to_string(p) +
                               "; shrink T or p");
    MomentEstimate est;
    est.p = p;
    est.value = (mx + std::log(total / N)) / T_eff;
    std::vector<double> loo(g.size());
    double loo_mean = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      loo[i] = (mx + std::log((total - terms[i]) / (N - 1))) / T_eff;
      loo_mean += loo[i];
    }
    loo_mean /= N;
    double ss = 0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    est.stderr_ = std::sqrt((N - 1) / N * ss);
    out.estimates.push_back(est);
  }
  return out;
}

struct FisherCheck {
  double fi_rho = 0;            // closed-form Fisher information of the Gaussian law
  double minus_lambda_sum = 0;  // eps tr A
  double residual = 0;          // |fi_rho - eps tr A|
};

/// Solvable benchmark of the Fisher-information identity FI(rho) = -lambda_S:
/// for the linear model the stationary law is Gaussian with A Sigma + Sigma A
/// = diag(q^2), and FI(rho) = (eps/2) sum_k q_k^2 (Sigma^{-1})_{kk} collapses
/// to eps tr A. Pure linear algebra; rank-deficient forcing has no stationary
/// density and is reported as an error.
inline FisherCheck gaussian_fisher_check(const Eigen::MatrixXd& A, const std::vector<double>& q,
                                         double epsilon) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw std::invalid_argument("gaussian_fisher_check: A must be square");
  if (static_cast<int>(q.size()) != n)
    throw std::invalid_argument("gaussian_fisher_check: need one amplitude per coordinate");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("gaussian_fisher_check: A must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("gaussian_fisher_check: A must be positive-definite");

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) Q(i, i) = q[i] * q[i];
  // A Sigma + Sigma A = Q in the eigenbasis of A
  const Eigen::MatrixXd V = es.eigenvectors();
  const Eigen::VectorXd d = es.eigenvalues();
  const Eigen::MatrixXd Qt = V.transpose() * Q * V;
  Eigen::MatrixXd St(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) St(i, j) = Qt(i, j) / (d[i] + d[j]);
  const Eigen::MatrixXd Sigma = V * St * V.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(Sigma);
  const double sigma_scale = std::max(1e-300, ss.eigenvalues().cwiseAbs().maxCoeff());
  if (ss.eigenvalues().minCoeff() <= 1e-12 * sigma_scale)
    throw std::domain_error(
        "gaussian_fisher_check: forcing does not span; the stationary law has no density");

  const Eigen::MatrixXd Sigma_inv = Sigma.inverse();
  FisherCheck out;
  for (int k = 0; k < n; ++k) out.fi_rho += q[k] * q[k] * Sigma_inv(k, k);
  out.fi_rho *= 0.5 * epsilon;
  out.minus_lambda_sum = epsilon * A.trace();
  out.residual = std::abs(out.fi_rho - out.minus_lambda_sum);
  return out;
}

struct FkAverage {
  double lambda_sum_estimate = 0;
};

/// Stationary average of Q(x) = div X_0(x). Constant for Euler-like drifts,
/// so the average is exact; the pathway exists for future non-Euler drifts.
inline FkAverage fk_average(const BilinearModel& m, const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty()) throw std::invalid_argument("fk_average: empty sample set");
  FkAverage out;
  for (const auto& x : samples) out.lambda_sum_estimate += m.drift_divergence(x);
  out.lambda_sum_estimate /= static_cast<double>(samples.size());
  return out;
}

}  // namespace lyap
