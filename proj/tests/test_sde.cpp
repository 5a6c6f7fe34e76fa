#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "lyap/sde.hpp"
#include "support/test_support.hpp"

using namespace lyap;
using lyap::testing::TestRng;

namespace {

IntegratorConfig cfg_of(double dt, double T, std::uint64_t seed, Scheme scheme = Scheme::EulerMaruyama) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.T = T;
  cfg.seed = seed;
  cfg.scheme = scheme;
  return cfg;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("identical seeds give bit-identical trajectories") {
  const auto m = build_l96(7, {1, 1}, 0.1);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(7, 0.5);
  const auto cfg = cfg_of(1e-3, 2.0, 42);
  const auto a = integrate(m, x0, cfg);
  const auto b = integrate(m, x0, cfg);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i)
    CHECK(a.states[i] == b.states[i]);  // exact, not approximate
  const auto c = integrate(m, x0, cfg.with_seed(43));
  CHECK(a.states.back() != c.states.back());
}

TEST_CASE("noise-free linear model decays like exp(-eps t)") {
  const auto m = build_ou({1.0}, {}, 0.5);
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  for (const auto scheme : {Scheme::EulerMaruyama, Scheme::DriftHeun}) {
    const double dt = 1e-3;
    const auto traj = integrate(m, x0, cfg_of(dt, 2.0, 0, scheme));
    const double expected = std::exp(-0.5 * 2.0);
    const double got = traj.states.back()[0];
    // Euler is O(dt), Heun O(dt^2) on the drift
    const double budget = scheme == Scheme::EulerMaruyama ? 5 * dt : 5 * dt * dt;
    CHECK(std::abs(got - expected) <= budget);
  }
}

TEST_CASE("deterministic conservative flow drifts in |x|^2 at O(dt) per unit time") {
  const auto l96 = build_l96(7, {1, 1}, 0.0);
  const auto m = strip_forcing(l96);  // eps = 0, no noise: pure shear flow
  TestRng rng(9);
  const Eigen::VectorXd x0 = rng.next_vector(7, 1.0);
  const double e0 = x0.squaredNorm();
  double drift_coarse = 0, drift_fine = 0;
  for (const double dt : {2e-3, 1e-3}) {
    const auto traj = integrate(m, x0, cfg_of(dt, 5.0, 0));
    const double drift = std::abs(traj.states.back().squaredNorm() - e0) / 5.0;
    (dt == 2e-3 ? drift_coarse : drift_fine) = drift;
  }
  CHECK(drift_fine < drift_coarse);
  CHECK(drift_fine / drift_coarse == Catch::Approx(0.5).margin(0.2));
}

TEST_CASE("OU stationary moments match the Lyapunov-equation covariance") {
  // dx_k = -eps A_kk x_k dt + sqrt(eps) q_k dW: A Sigma + Sigma A = Q gives
  // Sigma_kk = q_k^2 / (2 A_kk), independently of eps.
  const auto m = build_ou({1.0, 2.0}, {1.0, 1.0}, 0.1);
  const auto cfg = cfg_of(1e-2, 4e4, 7);
  const auto samples = stationary_samples(m, Eigen::VectorXd::Zero(2), cfg, 25);
  REQUIRE(samples.size() > 10000);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2), second = Eigen::VectorXd::Zero(2);
  for (const auto& x : samples) {
    mean += x;
    second += x.cwiseProduct(x);
  }
  mean /= static_cast<double>(samples.size());
  second /= static_cast<double>(samples.size());
  const double var1 = 0.5, var2 = 0.25;
  // integrated autocorrelation time ~ 1/(eps A_kk); inflate the naive SE accordingly
  const double tau1 = 1.0 / (0.1 * 1.0), tau2 = 1.0 / (0.1 * 2.0);
  const double dt_sample = cfg.dt * 25;
  const double se1 = std::sqrt(var1 * var1 * 2.0 * (1.0 + 2.0 * tau1 / dt_sample) / samples.size());
  const double se2 = std::sqrt(var2 * var2 * 2.0 * (1.0 + 2.0 * tau2 / dt_sample) / samples.size());
  CHECK(std::abs(mean[0]) <= 3 * std::sqrt(var1 * (1.0 + 2.0 * tau1 / dt_sample) / samples.size()));
  CHECK(std::abs(mean[1]) <= 3 * std::sqrt(var2 * (1.0 + 2.0 * tau2 / dt_sample) / samples.size()));
  CHECK(std::abs(second[0] - var1) <= std::max(3 * se1, 0.05 * var1));
  CHECK(std::abs(second[1] - var2) <= std::max(3 * se2, 0.05 * var2));
}

TEST_CASE("Euler-Maruyama strong error on OU scales like dt") {
  // Couple the scheme to the exact OU transition through the same increments:
  // x' = e^{-a dt} x + eta, eta = c1 dW + c2 xi with the exact covariance.
  const double eps = 0.2, a = 1.0, q = 1.0;
  const double arate = eps * a;
  const double T = 1.0;
  const int ensemble = 4000;
  std::vector<double> dts = {1e-2, 5e-3, 2.5e-3}, errs;
  for (const double dt : dts) {
    const double decay = std::exp(-arate * dt);
    const double var_eta = eps * q * q * (1.0 - decay * decay) / (2.0 * arate);
    const double cov = std::sqrt(eps) * q * (1.0 - decay) / arate;  // cov(eta, dW)
    const double c1 = cov / dt;
    const double c2 = std::sqrt(std::max(0.0, var_eta - cov * cov / dt));
    const int steps = static_cast<int>(std::lround(T / dt));
    double sum_abs = 0;
    for (int path = 0; path < ensemble; ++path) {
      double xem = 1.0, xexact = 1.0;
      for (int s = 0; s < steps; ++s) {
        const double dW = std::sqrt(dt) * gaussian_increment(1000 + path, 0, s);
        const double xi = gaussian_increment(1000 + path, 1, s);
        xem += -arate * xem * dt + std::sqrt(eps) * q * dW;
        xexact = decay * xexact + c1 * dW + c2 * xi;
      }
      sum_abs += std::abs(xem - xexact);
    }
    errs.push_back(sum_abs / ensemble);
  }
  // least-squares slope of log err vs log dt
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double lx = std::log(dts[i]), ly = std::log(errs[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double n = static_cast<double>(dts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  INFO("errors " << errs[0] << " " << errs[1] << " " << errs[2] << ", slope " << slope);
  CHECK(slope >= 0.9);
  CHECK(slope <= 1.1);
}

TEST_CASE("energy balance on the OU benchmark") {
  const auto m = build_ou({1.0, 2.0}, {1.0, 1.0}, 0.1);
  const auto samples = stationary_samples(m, Eigen::VectorXd::Zero(2), cfg_of(1e-2, 3e4, 21), 10);
  const auto bal = energy_balance(m, samples);
  CHECK(bal.forcing_input == Catch::Approx(1.0));  // (1 + 1) / 2
  CHECK(bal.mean_dissipation == Catch::Approx(1.0).epsilon(0.05));
  CHECK(bal.residual < 0.05);
}

TEST_CASE("energy balance with zero forcing is zero on both sides") {
  const auto m = build_ou({1.0, 2.0}, {}, 0.1);
  const auto samples = stationary_samples(m, Eigen::VectorXd::Zero(2), cfg_of(1e-2, 200.0, 3), 10);
  const auto bal = energy_balance(m, samples);
  CHECK(bal.forcing_input == 0.0);
  CHECK(bal.mean_dissipation == 0.0);
  CHECK(bal.residual == 0.0);
  // decaying run: residual degrades gracefully to the absolute dissipation
  Eigen::VectorXd x0(2);
  x0 << 1e-3, 0;
  const auto decay = energy_balance(m, stationary_samples(m, x0, cfg_of(1e-2, 200.0, 3), 10));
  CHECK(decay.residual < 1e-7);
  CHECK_THROWS_AS(energy_balance(m, {}), std::invalid_argument);
}

TEST_CASE("energy balance residual decays with horizon like T^{-1/2}") {
  const auto m = build_ou({1.0, 2.0}, {1.0, 1.0}, 0.1);
  std::vector<double> res_short, res_long;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s1 = stationary_samples(m, Eigen::VectorXd::Zero(2), cfg_of(1e-2, 2e3, 100 + seed), 5);
    const auto s2 = stationary_samples(m, Eigen::VectorXd::Zero(2), cfg_of(1e-2, 3.2e4, 200 + seed), 5);
    res_short.push_back(energy_balance(m, s1).residual);
    res_long.push_back(energy_balance(m, s2).residual);
  }
  // 16x the horizon should shrink the median residual by about 4; allow slack
  CHECK(median(res_long) < median(res_short));
  CHECK(median(res_long) < 0.6 * median(res_short));
}

TEST_CASE("blow-up guard fires only when dt violates the stability bound") {
  const auto m = build_l96(7, {1, 1}, 0.0);
  TestRng rng(31);
  Eigen::VectorXd x0 = 8.0 * rng.next_vector(7, 1.0);  // generic, |x| ~ 8
  // healthy: suggested dt for this state scale
  const double good_dt = suggested_dt(m, 8.0);
  CHECK_NOTHROW(integrate(strip_forcing(m), x0, cfg_of(good_dt, 5.0, 0)));
  // violating the bound by a large factor diverges on the deterministic flow
  bool fired = false;
  try {
    auto violating = cfg_of(0.2, 2000.0, 0);
    violating.record_stride = 100;
    integrate(strip_forcing(m), x0, violating);
  } catch (const BlowupError& e) {
    fired = true;
    CHECK(e.time() > 0);
  }
  CHECK(fired);
}

TEST_CASE("stationary samples with stride 1 equal the trajectory tail") {
  const auto m = build_ou({1.0, 2.0}, {1.0, 1.0}, 0.1);
  auto cfg = cfg_of(1e-2, 10.0, 5);
  cfg.burn_in = 2.0;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(2);
  const auto traj = integrate(m, x0, cfg);
  const auto samples = stationary_samples(m, x0, cfg, 1);
  const std::size_t burn_frames = 200;  // burn_in / dt
  REQUIRE(samples.size() == traj.states.size() - burn_frames - 1);
  for (std::size_t i = 0; i < samples.size(); ++i)
    CHECK(samples[i] == traj.states[burn_frames + 1 + i]);
}

TEST_CASE("trajectory CSV and binary frame round trip") {
  namespace fs = std::filesystem;
  const auto m = build_ou({1.0, 2.0}, {1.0, 1.0}, 0.1);
  auto cfg = cfg_of(1e-2, 1.0, 9);
  cfg.record_stride = 10;
  const auto traj = integrate(m, Eigen::VectorXd::Ones(2), cfg);
  const auto dir = fs::temp_directory_path() / "lyap_sde_test";
  fs::create_directories(dir);

  const auto bin = (dir / "traj.bin").string();
  write_trajectory_frames(traj, bin, 0xABCDu);
  const auto back = read_trajectory_frames(bin);
  REQUIRE(back.states.size() == traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    CHECK(back.states[i] == traj.states[i]);  // bit-exact payload
  CHECK(back.seed == traj.seed);
  CHECK(back.dt == Catch::Approx(0.1));  // sample spacing = dt * stride

  const auto csv = (dir / "traj.csv").string();
  write_trajectory_csv(traj, csv, "deadbeef");
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("seed=9") != std::string::npos);
  CHECK(line.find("config_hash=deadbeef") != std::string::npos);
  std::getline(in, line);
  CHECK(line == "t,x1,x2");
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == traj.states.size());
}

TEST_CASE("config validation") {
  IntegratorConfig bad;
  bad.dt = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.burn_in = bad.T;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.record_stride = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
