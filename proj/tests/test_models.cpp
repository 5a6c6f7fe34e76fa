#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "lyap/model.hpp"
#include "support/test_support.hpp"

using namespace lyap;
using lyap::testing::TestRng;

namespace {

/// Central-difference Jacobian oracle: column j from (f(x+he_j)-f(x-he_j))/2h.
Eigen::MatrixXd fd_jacobian(const BilinearModel& m, const Eigen::VectorXd& x, double h) {
  const int n = m.dim();
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (m.drift(xp) - m.drift(xm)) / (2 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

GNSEConfig basic_gnse(int N, Rational r) {
  GNSEConfig cfg;
  cfg.N = N;
  cfg.r = std::move(r);
  cfg.forced = {{{1, 0}, 1, 1},  {{-1, 0}, 1, 1}, {{0, 1}, 1, 1},
                {{0, -1}, 1, 1}, {{1, 1}, 1, 1},  {{-1, -1}, 1, 1}};
  return cfg;
}

std::vector<BilinearModel> model_battery() {
  std::vector<BilinearModel> battery;
  battery.push_back(build_l96(7, {1, 1}));
  battery.push_back(build_l96(10, {1, 1}, 0.05));
  battery.push_back(build_ou({1, 2}, {1, 1}));
  battery.push_back(build_gnse(basic_gnse(2, 1)));
  battery.push_back(build_gnse(basic_gnse(3, make_rational(3, 2)), 0.2));
  return battery;
}

}  // namespace

TEST_CASE("L96 quadratic drift at e1 + e2 is -e3") {
  const auto m = build_l96(7, {1, 1});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(7);
  x[0] = x[1] = 1;
  Eigen::VectorXd b(7);
  m.bilinear().eval_quadratic(x.data(), b.data());
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(7);
  expected[2] = -1;  // only l = 3 survives: x4 x2 - x1 x2 = -1
  CHECK((b - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("L96 bilinear term vanishes on every coordinate axis") {
  for (int n : {4, 7, 12}) {
    const auto m = build_l96(n, {1, 1});
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[k] = 1;
      Eigen::VectorXd b(n);
      m.bilinear().eval_quadratic(e.data(), b.data());
      CHECK(b.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("energy conservation and zero divergence on random states") {
  TestRng rng(2024);
  for (const auto& m : model_battery()) {
    const int n = m.dim();
    const double bnorm = m.bilinear().coeff_norm();
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd x = rng.next_vector(n, 3.0);
      Eigen::VectorXd b(n);
      m.bilinear().eval_quadratic(x.data(), b.data());
      CHECK(std::abs(x.dot(b)) <= 1e-10 * x.squaredNorm() * std::max(bnorm, 1.0));
      CHECK(std::abs(m.bilinear().divergence(x.data())) <=
            1e-10 * std::max(bnorm, 1.0) * std::max(x.norm(), 1.0));
    }
  }
}

TEST_CASE("bilinear homogeneity B(ax, ax) = a^2 B(x, x)") {
  TestRng rng(5);
  const auto m = build_l96(9, {1, 1});
  const Eigen::VectorXd x = rng.next_vector(9, 2.0);
  const double alpha = 1.7;
  Eigen::VectorXd b(9), bs(9);
  m.bilinear().eval_quadratic(x.data(), b.data());
  const Eigen::VectorXd xs = alpha * x;
  m.bilinear().eval_quadratic(xs.data(), bs.data());
  CHECK((bs - alpha * alpha * b).cwiseAbs().maxCoeff() < 1e-12 * bs.cwiseAbs().maxCoeff());
}

TEST_CASE("GNSE advection coefficient hand values") {
  const Rational one = 1;
  // c_{(1,0),(1,1)} at r=1: pairing -1, (1/2 - 1) = -1/2, product 1/2
  CHECK(advection_coeff({1, 0}, {1, 1}, one) == make_rational(1, 2));
  // equal |.|_r norms kill the coefficient
  CHECK(advection_coeff({1, 0}, {0, 1}, one).is_zero());
  // parallel wavevectors kill the pairing
  CHECK(advection_coeff({1, 0}, {2, 0}, one).is_zero());
  // symmetry c_{j,l} = c_{l,j}
  CHECK(advection_coeff({1, 1}, {2, -1}, make_rational(3, 2)) ==
        advection_coeff({2, -1}, {1, 1}, make_rational(3, 2)));
}

TEST_CASE("GNSE real chart has dimension (2N+1)^2 - 1 and diagonal damping |k|_r^2") {
  const auto m = build_gnse(basic_gnse(2, 1));
  CHECK(m.dim() == 24);
  CHECK(m.damping().isDiagonal());
  // two forcing vectors per forced half-lattice mode
  CHECK(m.forcing().size() == 6);
  const auto m32 = build_gnse(basic_gnse(3, make_rational(3, 2)));
  CHECK(m32.dim() == 48);
  // |(0,1)|_r^2 = r^2 = 9/4 must appear on the diagonal
  bool found = false;
  for (int i = 0; i < m32.dim(); ++i)
    if (std::abs(m32.damping()(i, i) - 2.25) < 1e-15) found = true;
  CHECK(found);
}

TEST_CASE("GNSE real-coordinate form conserves enstrophy exactly") {
  TestRng rng(77);
  for (const Rational& r : {Rational(1), Rational(2), make_rational(1, 2)}) {
    const auto m = build_gnse(basic_gnse(2, r));
    std::vector<Rational> x(static_cast<std::size_t>(m.dim()));
    for (auto& v : x) v = make_rational(rng.next_int(-9, 9), rng.next_int(1, 7));
    const auto b = m.bilinear().eval_quadratic_exact(x);
    Rational dot;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * b[i];
    CHECK(dot.is_zero());
  }
}

TEST_CASE("eval_drift basics") {
  const auto m = build_l96(7, {1, 1}, 0.0);
  SECTION("zero state maps to zero") {
    CHECK(eval_drift(m, Eigen::VectorXd::Zero(7)).norm() == 0.0);
  }
  SECTION("epsilon = 0 recovers the pure bilinear term") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(7);
    x[0] = x[1] = 1;
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(7);
    expected[2] = -1;
    CHECK((eval_drift(m, x) - expected).norm() == 0.0);
  }
  SECTION("pure linear damping") {
    const auto ou = build_ou({1, 2}, {1, 1}, 0.1);
    Eigen::VectorXd x(2);
    x << 1, 1;
    const Eigen::VectorXd d = eval_drift(ou, x);
    CHECK(d[0] == Catch::Approx(-0.1).margin(1e-15));
    CHECK(d[1] == Catch::Approx(-0.2).margin(1e-15));
  }
  SECTION("dimension mismatch throws") {
    CHECK_THROWS_AS(eval_drift(m, Eigen::VectorXd::Zero(6)), std::invalid_argument);
  }
}

TEST_CASE("drift Jacobian at the origin is -eps A") {
  const auto m = build_l96(7, {1, 1}, 0.3);
  const Eigen::MatrixXd J = eval_drift_jacobian(m, Eigen::VectorXd::Zero(7));
  CHECK((J + 0.3 * Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("drift Jacobian matches central finite differences") {
  TestRng rng(11);
  for (const auto& m : model_battery()) {
    const Eigen::VectorXd x = rng.next_vector(m.dim(), 5.0);
    const Eigen::MatrixXd J = eval_drift_jacobian(m, x);
    const Eigen::MatrixXd Jfd = fd_jacobian(m, x, 1e-5);
    const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
    CHECK((J - Jfd).cwiseAbs().maxCoeff() <= 1e-8 * scale);
  }
}

TEST_CASE("Jacobian bilinear part scales linearly in the base point") {
  TestRng rng(12);
  const auto m = build_l96(8, {1, 1}, 0.0);  // eps = 0 isolates the B part
  const Eigen::VectorXd x = rng.next_vector(8, 2.0);
  const Eigen::MatrixXd J1 = eval_drift_jacobian(m, x);
  const Eigen::MatrixXd J2 = eval_drift_jacobian(m, (2.0 * x).eval());
  CHECK((J2 - 2.0 * J1).cwiseAbs().maxCoeff() < 1e-13 * J2.cwiseAbs().maxCoeff());
}

TEST_CASE("fluctuation-dissipation rescaling") {
  const auto m = build_l96(7, {1, 1}, 0.25, Scaling::Unscaled);
  const auto r = rescale_fd(m);
  CHECK(r.scaling() == Scaling::FluctuationDissipation);
  CHECK(r.epsilon() == Catch::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(rescale_fd(r), std::invalid_argument);
  const auto id = rescale_fd(build_l96(7, {1, 1}, 1.0, Scaling::Unscaled));
  CHECK(id.epsilon() == 1.0);
}

TEST_CASE("L96 builds exactly one forcing vector per nonzero amplitude") {
  const auto m = build_l96(9, {1.0, 0.5});
  CHECK(m.forcing().size() == 2);
  const auto sparse = build_l96(9, {1.0, 0.5, 0.0, 0.0});
  CHECK(sparse.forcing().size() == 2);
}

TEST_CASE("construction rejects bad inputs") {
  CHECK_THROWS_AS(build_l96(3, {1, 1}), std::invalid_argument);          // cyclic collision
  CHECK_THROWS_AS(build_l96(7, {0.0, 0.0}), std::invalid_argument);      // no forcing
  CHECK_THROWS_AS(build_ou({1, -2}, {1, 1}), std::invalid_argument);     // not positive
  Eigen::MatrixXd skew(2, 2);
  skew << 1, 1, -1, 1;
  CHECK_THROWS_AS(build_linear(skew, {1, 1}), std::invalid_argument);    // not symmetric
  GNSEConfig bad = basic_gnse(2, 1);
  bad.r = Rational(-1);
  CHECK_THROWS_AS(build_gnse(bad), std::invalid_argument);               // r <= 0
  GNSEConfig small = basic_gnse(1, 1);
  CHECK_THROWS_AS(build_gnse(small), std::invalid_argument);             // N < 2
  GNSEConfig empty;
  empty.forced.clear();
  CHECK_THROWS_AS(build_gnse(empty), std::invalid_argument);             // degenerate forcing
  GNSEConfig open = basic_gnse(2, 1);
  open.forced.pop_back();  // drop (-1,-1): no longer closed under negation
  CHECK_THROWS_AS(build_gnse(open), std::invalid_argument);
  GNSEConfig lop = basic_gnse(2, 1);
  lop.forced[0].beta = 0;  // alpha = 0 <=> beta = 0 violated
  CHECK_THROWS_AS(build_gnse(lop), std::invalid_argument);
}

TEST_CASE("model config round-trips losslessly through JSON") {
  for (const auto& m : model_battery()) {
    const auto j = m.to_json();
    const auto back = model_from_json(j);
    CHECK(back.fingerprint() == m.fingerprint());
    CHECK(back.to_json() == j);
  }
  // rationals travel as p/q strings
  const auto j = build_gnse(basic_gnse(3, make_rational(3, 2))).to_json();
  CHECK(j.at("r").get<std::string>() == "3/2");
}

TEST_CASE("custom float-coefficient models are flagged inexact") {
  // rigid-body-style conserving nonlinearity B = (x2 x3, -x1 x3, 0)
  nlohmann::json j = {{"kind", "custom"},
                      {"n", 3},
                      {"epsilon", 0.1},
                      {"scaling", "fd"},
                      {"terms", {{0, 1, 2, 1.0}, {1, 0, 2, -1.0}}},
                      {"damping", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}},
                      {"forcing", {{1.0, 0.0, 0.0}}}};
  const auto m = model_from_json(j);
  CHECK_FALSE(m.exact_coefficients());
  nlohmann::json jx = j;
  jx["terms"] = {{0, 1, 2, "1"}, {1, 0, 2, "-1"}};
  CHECK(model_from_json(jx).exact_coefficients());
}

TEST_CASE("non-conserving custom drift is rejected at construction") {
  nlohmann::json j = {{"kind", "custom"},
                      {"n", 2},
                      {"epsilon", 0.1},
                      {"scaling", "fd"},
                      {"terms", {{0, 0, 1, "1"}}},  // x . B(x,x) = x0^2 x1 != 0
                      {"damping", {{1.0, 0.0}, {0.0, 1.0}}},
                      {"forcing", {{1.0, 0.0}}}};
  CHECK_THROWS_AS(model_from_json(j), std::invalid_argument);
}
