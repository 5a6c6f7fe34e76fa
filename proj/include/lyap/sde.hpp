#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyap/model.hpp"
#include "lyap/rng.hpp"

namespace lyap {

enum class Scheme { EulerMaruyama, DriftHeun };

inline std::string to_string(Scheme s) {
  return s == Scheme::EulerMaruyama ? "euler-maruyama" : "drift-heun";
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "euler-maruyama" || s == "em") return Scheme::EulerMaruyama;
  if (s == "drift-heun" || s == "heun") return Scheme::DriftHeun;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

struct IntegratorConfig {
  double dt = 1e-3;
  double T = 100.0;
  double burn_in = -1.0;  // < 0 selects the default, 10% of T
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerMaruyama;
  std::int64_t record_stride = 1;

  double effective_burn_in() const { return burn_in < 0 ? 0.1 * T : burn_in; }

  void validate() const {
    if (!(dt > 0)) throw std::invalid_argument("IntegratorConfig: dt must be positive");
    if (!(T > dt)) throw std::invalid_argument("IntegratorConfig: horizon must exceed dt");
    if (effective_burn_in() >= T)
      throw std::invalid_argument("IntegratorConfig: burn_in must be below T");
    if (record_stride < 1) throw std::invalid_argument("IntegratorConfig: stride must be >= 1");
  }

  IntegratorConfig with_seed(std::uint64_t s) const {
    IntegratorConfig c = *this;
    c.seed = s;
    return c;
  }
};

/// Explicit schemes need a CFL-like guard on the quadratic drift. Default
/// dt = min(1e-3, 0.1 / (||A|| eps), 0.01 / x_scale); overridable everywhere.
inline double suggested_dt(const BilinearModel& m, double x_scale = 1.0) {
  double dt = 1e-3;
  const double damping_rate = m.epsilon() * m.damping().cwiseAbs().maxCoeff();
  if (damping_rate > 0) dt = std::min(dt, 0.1 / damping_rate);
  const double drift_scale = std::max(x_scale, m.bilinear().coeff_norm() * x_scale * x_scale);
  if (drift_scale > 0) dt = std::min(dt, 0.01 / drift_scale);
  return dt;
}

/// Raised when a trajectory leaves the finite range; carries the failure time.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(double time, std::string what)
      : std::runtime_error(std::move(what)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::string model_fingerprint;
  std::uint64_t seed = 0;
  double dt = 0;               // integration step
  std::int64_t stride = 1;     // recording stride in steps
  double max_abs_state = 0;    // empirical moment diagnostics
  double mean_sq_norm = 0;
};

/// Streaming one-step integrator shared by the trajectory, ensemble and
/// projective drivers. Owns nothing mutable beyond its own state; one
/// instance per (model, seed) run.
class Stepper {
 public:
  Stepper(const BilinearModel& m, const Eigen::VectorXd& x0, const IntegratorConfig& cfg)
      : model_(&m), cfg_(cfg), x_(x0), drift_(m.dim()), predictor_(m.dim()), drift2_(m.dim()) {
    cfg_.validate();
    if (x0.size() != m.dim()) throw std::invalid_argument("Stepper: x0 dimension mismatch");
    sqrt_dt_ = std::sqrt(cfg_.dt);
    noise_scale_ = m.noise_scale();
  }

  const Eigen::VectorXd& state() const { return x_; }
  double time() const { return static_cast<double>(step_) * cfg_.dt; }
  std::int64_t step_index() const { return step_; }
  const IntegratorConfig& config() const { return cfg_; }

  /// Gaussian increments for the current step, one per forcing stream.
  void draw_noise(std::vector<double>& dW) const {
    const auto& forcing = model_->forcing();
    dW.resize(forcing.size());
    for (std::size_t k = 0; k < forcing.size(); ++k)
      dW[k] = sqrt_dt_ * gaussian_increment(cfg_.seed, static_cast<std::uint32_t>(k),
                                            static_cast<std::uint64_t>(step_));
  }

  void advance() {
    draw_noise(dW_);
    advance_with_noise(dW_);
  }

  /// One step of the configured scheme with caller-supplied increments
  /// (already scaled by sqrt(dt) but not by the model's noise scale).
  void advance_with_noise(const std::vector<double>& dW) {
    const double dt = cfg_.dt;
    model_->drift_into(x_.data(), drift_.data());
    if (cfg_.scheme == Scheme::EulerMaruyama) {
      x_ += dt * drift_;
    } else {
      predictor_ = x_ + dt * drift_;
      add_noise(predictor_, dW);
      model_->drift_into(predictor_.data(), drift2_.data());
      x_ += 0.5 * dt * (drift_ + drift2_);
    }
    add_noise(x_, dW);
    ++step_;
    if (!x_.allFinite())
      throw BlowupError(time(), "trajectory blew up at t = " + std::to_string(time()));
  }

 private:
  void add_noise(Eigen::VectorXd& target, const std::vector<double>& dW) {
    const auto& forcing = model_->forcing();
    if (dW.size() != forcing.size())
      throw std::invalid_argument("Stepper: noise increment count mismatch");
    for (std::size_t k = 0; k < forcing.size(); ++k)
      target += (noise_scale_ * dW[k]) * forcing[k];
  }

  const BilinearModel* model_;
  IntegratorConfig cfg_;
  Eigen::VectorXd x_;
  Eigen::VectorXd drift_, predictor_, drift2_;
  std::vector<double> dW_;
  std::int64_t step_ = 0;
  double sqrt_dt_ = 0;
  double noise_scale_ = 1;
};

inline std::int64_t step_count(const IntegratorConfig& cfg) {
  return static_cast<std::int64_t>(std::llround(cfg.T / cfg.dt));
}

/// Like integrate, but on blow-up returns the frames recorded so far together
/// with the failure time instead of throwing; callers can flush them as
/// partial artifacts.
inline std::pair<Trajectory, std::optional<double>> integrate_keep_partial(
    const BilinearModel& m, const Eigen::VectorXd& x0, const IntegratorConfig& cfg) {
  cfg.validate();
  const std::int64_t steps = step_count(cfg);
  if (steps / cfg.record_stride > 50'000'000)
    throw std::invalid_argument("integrate: recording would exceed 5e7 frames; raise the stride");
  Trajectory traj;
  traj.model_fingerprint = m.fingerprint();
  traj.seed = cfg.seed;
  traj.dt = cfg.dt;
  traj.stride = cfg.record_stride;
  traj.times.reserve(static_cast<std::size_t>(steps / cfg.record_stride) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps / cfg.record_stride) + 1);

  Stepper stepper(m, x0, cfg);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  double sumsq = x0.squaredNorm();
  traj.max_abs_state = x0.cwiseAbs().maxCoeff();
  std::int64_t done = 0;
  std::optional<double> blowup_time;
  for (std::int64_t s = 1; s <= steps; ++s) {
    try {
      stepper.advance();
    } catch (const BlowupError& e) {
      blowup_time = e.time();
      break;
    }
    const auto& x = stepper.state();
    sumsq += x.squaredNorm();
    traj.max_abs_state = std::max(traj.max_abs_state, x.cwiseAbs().maxCoeff());
    if (s % cfg.record_stride == 0) {
      traj.times.push_back(stepper.time());
      traj.states.push_back(x);
    }
    done = s;
  }
  traj.mean_sq_norm = sumsq / static_cast<double>(done + 1);
  return {std::move(traj), blowup_time};
}

/// Integrates the SDE and records every record_stride-th state (including the
/// initial condition). Identical (model, x0, cfg) inputs give bit-identical
/// trajectories.
inline Trajectory integrate(const BilinearModel& m, const Eigen::VectorXd& x0,
                            const IntegratorConfig& cfg) {
  auto [traj, blowup_time] = integrate_keep_partial(m, x0, cfg);
  if (blowup_time)
    throw BlowupError(*blowup_time,
                      "trajectory blew up at t = " + std::to_string(*blowup_time));
  return traj;
}

/// Post-burn-in states subsampled every `stride` steps.
inline std::vector<Eigen::VectorXd> stationary_samples(const BilinearModel& m,
                                                       const Eigen::VectorXd& x0,
                                                       const IntegratorConfig& cfg,
                                                       std::int64_t stride) {
  cfg.validate();
  if (stride < 1) throw std::invalid_argument("stationary_samples: stride must be >= 1");
  const std::int64_t steps = step_count(cfg);
  const std::int64_t burn_steps =
      static_cast<std::int64_t>(std::llround(cfg.effective_burn_in() / cfg.dt));
  std::vector<Eigen::VectorXd> samples;
  Stepper stepper(m, x0, cfg);
  for (std::int64_t s = 1; s <= steps; ++s) {
    stepper.advance();
    if (s > burn_steps && (s - burn_steps) % stride == 0) samples.push_back(stepper.state());
  }
  return samples;
}

struct EnergyBalance {
  double mean_energy = 0;       // time average of |x|^2 / 2
  double mean_dissipation = 0;  // time average of <x, A x>
  double forcing_input = 0;     // stationary value implied by the Ito budget
  double residual = 0;          // relative mismatch of the two
};

/// Ito energy budget over stationary samples. Under fluctuation-dissipation
/// scaling the stationary <x, A x> equals sum |X_k|^2 / 2 independently of
/// epsilon; in unscaled form the same balance carries a 1/epsilon.
inline EnergyBalance energy_balance(const BilinearModel& m,
                                    const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty()) throw std::invalid_argument("energy_balance: empty sample set");
  EnergyBalance out;
  for (const auto& x : samples) {
    out.mean_energy += 0.5 * x.squaredNorm();
    out.mean_dissipation += x.dot(m.damping() * x);
  }
  out.mean_energy /= static_cast<double>(samples.size());
  out.mean_dissipation /= static_cast<double>(samples.size());
  double forcing_sq = 0;
  for (const auto& f : m.forcing()) forcing_sq += f.squaredNorm();
  out.forcing_input = m.scaling() == Scaling::FluctuationDissipation
                          ? 0.5 * forcing_sq
                          : 0.5 * forcing_sq / m.epsilon();
  // relative mismatch, falling back to absolute for the unforced case
  out.residual = out.forcing_input != 0
                     ? std::abs(out.mean_dissipation - out.forcing_input) /
                           std::abs(out.forcing_input)
                     : std::abs(out.mean_dissipation);
  return out;
}

// ---- trajectory export ----

/// CSV columns t, x1..xn; metadata lines lead with '#'.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                                 const std::string& config_hash = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# model=" << traj.model_fingerprint << " seed=" << traj.seed;
  if (!config_hash.empty()) out << " config_hash=" << config_hash;
  out << "\n";
  out << "t";
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << "\n";
  out.precision(17);
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    out << traj.times[s];
    for (int i = 0; i < n; ++i) out << ',' << traj.states[s][i];
    out << "\n";
  }
}

/// Compact binary frames. Header (little-endian): magic "LYAPTRJ1" (8 bytes),
/// u32 version, u32 n, f64 dt (sample spacing), u64 count, u64 seed,
/// u64 config hash; then count frames of n f64 states.
inline void write_trajectory_frames(const Trajectory& traj, const std::string& path,
                                    std::uint64_t config_hash = 0) {
  static_assert(std::endian::native == std::endian::little,
                "frame format is defined little-endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  const char magic[8] = {'L', 'Y', 'A', 'P', 'T', 'R', 'J', '1'};
  const std::uint32_t version = 1;
  const std::uint32_t n = traj.states.empty() ? 0 : static_cast<std::uint32_t>(traj.states.front().size());
  const double dt = traj.dt * static_cast<double>(traj.stride);
  const std::uint64_t count = traj.states.size();
  out.write(magic, 8);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&dt), 8);
  out.write(reinterpret_cast<const char*>(&count), 8);
  out.write(reinterpret_cast<const char*>(&traj.seed), 8);
  out.write(reinterpret_cast<const char*>(&config_hash), 8);
  for (const auto& x : traj.states)
    out.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(8) * n);
}

inline Trajectory read_trajectory_frames(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "LYAPTRJ1", 8) != 0)
    throw std::runtime_error(path + ": not a trajectory frame file");
  std::uint32_t version = 0, n = 0;
  double dt = 0;
  std::uint64_t count = 0, seed = 0, config_hash = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&dt), 8);
  in.read(reinterpret_cast<char*>(&count), 8);
  in.read(reinterpret_cast<char*>(&seed), 8);
  in.read(reinterpret_cast<char*>(&config_hash), 8);
  if (version != 1) throw std::runtime_error(path + ": unsupported frame version");
  Trajectory traj;
  traj.seed = seed;
  traj.dt = dt;
  traj.stride = 1;
  traj.times.reserve(count);
  traj.states.reserve(count);
  for (std::uint64_t s = 0; s < count; ++s) {
    Eigen::VectorXd x(n);
    in.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(8) * n);
    traj.times.push_back(static_cast<double>(s) * dt);
    traj.states.push_back(std::move(x));
  }
  if (!in) throw std::runtime_error(path + ": truncated frame file");
  return traj;
}

}  // namespace lyap
