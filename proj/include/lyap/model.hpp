#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lyap/bilinear.hpp"
#include "lyap/lattice.hpp"
#include "lyap/rational.hpp"

namespace lyap {

enum class Scaling { Unscaled, FluctuationDissipation };
enum class ModelKind { Linear, L96, GNSE, Custom };

inline std::string to_string(Scaling s) {
  return s == Scaling::Unscaled ? "unscaled" : "fluctuation-dissipation";
}
inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Linear: return "linear";
    case ModelKind::L96: return "l96";
    case ModelKind::GNSE: return "gnse";
    default: return "custom";
  }
}

/// FNV-1a over a string; used for config/model fingerprints.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// One forced wavevector with the amplitudes of its real/imaginary noise parts.
struct GNSEForcedMode {
  LatticeIndex k;
  double alpha = 0;
  double beta = 0;
};

/// Galerkin Navier-Stokes description: truncation N, rational aspect ratio r,
/// and the forced mode set (closed under k -> -k, amplitudes matching).
struct GNSEConfig {
  int N = 2;
  Rational r = 1;
  std::vector<GNSEForcedMode> forced;

  void validate() const {
    if (N < 2) throw std::invalid_argument("GNSEConfig: N must be >= 2");
    if (r <= 0) throw std::invalid_argument("GNSEConfig: aspect ratio must be positive");
    if (forced.empty()) throw std::invalid_argument("GNSEConfig: forced mode set is empty");
    const TruncatedLattice lattice(N);
    for (const auto& mode : forced) {
      if (!lattice.contains(mode.k))
        throw std::invalid_argument("GNSEConfig: forced mode " + mode.k.str() + " outside lattice");
      if ((mode.alpha == 0) != (mode.beta == 0))
        throw std::invalid_argument("GNSEConfig: alpha and beta must vanish together at " +
                                    mode.k.str());
      if (mode.alpha == 0)
        throw std::invalid_argument("GNSEConfig: unforced mode listed at " + mode.k.str());
      const auto partner = find(-mode.k);
      if (!partner)
        throw std::invalid_argument("GNSEConfig: forced set not closed under negation at " +
                                    mode.k.str());
      if (partner->alpha != mode.alpha || partner->beta != mode.beta)
        throw std::invalid_argument("GNSEConfig: amplitudes of " + mode.k.str() + " and " +
                                    (-mode.k).str() + " must match");
    }
  }

  std::optional<GNSEForcedMode> find(LatticeIndex k) const {
    for (const auto& mode : forced)
      if (mode.k == k) return mode;
    return std::nullopt;
  }

  /// Forced wavevectors as a plain set (the seed of the propagation check).
  std::vector<LatticeIndex> forced_set() const {
    std::vector<LatticeIndex> out;
    out.reserve(forced.size());
    for (const auto& mode : forced) out.push_back(mode.k);
    return out;
  }
};

/// Euler-like system description: energy-conserving bilinear drift B, damping
/// epsilon*A with A symmetric positive-definite, and constant forcing vectors.
/// Immutable after construction; all operations are pure.
class BilinearModel {
 public:
  BilinearModel(BilinearForm B, Eigen::MatrixXd A, std::vector<Eigen::VectorXd> forcing,
                double epsilon, Scaling scaling, ModelKind kind = ModelKind::Custom,
                std::optional<GNSEConfig> gnse = std::nullopt, bool exact_coeffs = true)
      : B_(std::move(B)),
        A_(std::move(A)),
        forcing_(std::move(forcing)),
        epsilon_(epsilon),
        scaling_(scaling),
        kind_(kind),
        gnse_(std::move(gnse)),
        exact_coeffs_(exact_coeffs) {
    const int n = B_.dim();
    if (A_.rows() != n || A_.cols() != n)
      throw std::invalid_argument("BilinearModel: damping matrix size mismatch");
    validate_spd(A_);
    for (const auto& x : forcing_) {
      if (x.size() != n) throw std::invalid_argument("BilinearModel: forcing vector size mismatch");
      if (x.norm() == 0.0) throw std::invalid_argument("BilinearModel: zero forcing vector");
    }
    if (epsilon_ < 0) throw std::invalid_argument("BilinearModel: epsilon must be nonnegative");
    B_.compile();
    validate_euler_structure();
    diag_damping_ = A_.isDiagonal(0.0);
    if (diag_damping_) a_diag_ = A_.diagonal();
    fingerprint_ = hex64(fnv1a64(to_json().dump()));
  }

  int dim() const { return B_.dim(); }
  const BilinearForm& bilinear() const { return B_; }
  const Eigen::MatrixXd& damping() const { return A_; }
  const std::vector<Eigen::VectorXd>& forcing() const { return forcing_; }
  double epsilon() const { return epsilon_; }
  Scaling scaling() const { return scaling_; }
  ModelKind kind() const { return kind_; }
  bool exact_coefficients() const { return exact_coeffs_; }
  const std::optional<GNSEConfig>& gnse() const { return gnse_; }
  const std::string& fingerprint() const { return fingerprint_; }

  double trace_damping() const { return A_.trace(); }

  /// sqrt(epsilon) under fluctuation-dissipation scaling, 1 otherwise;
  /// multiplies every forcing vector in the noise term.
  double noise_scale() const {
    return scaling_ == Scaling::FluctuationDissipation ? std::sqrt(epsilon_) : 1.0;
  }

  /// out = B(x,x) - epsilon A x
  void drift_into(const double* x, double* out) const {
    const int n = dim();
    B_.eval_quadratic(x, out);
    if (diag_damping_) {
      for (int i = 0; i < n; ++i) out[i] -= epsilon_ * a_diag_[i] * x[i];
    } else {
      Eigen::Map<const Eigen::VectorXd> xv(x, n);
      Eigen::Map<Eigen::VectorXd> ov(out, n);
      ov.noalias() -= epsilon_ * (A_ * xv);
    }
  }

  Eigen::VectorXd drift(const Eigen::VectorXd& x) const {
    require_dim(x);
    Eigen::VectorXd out(dim());
    drift_into(x.data(), out.data());
    return out;
  }

  /// out = 2 B(x,v) - epsilon A v  (drift Jacobian at x applied to v)
  void jacobian_apply_into(const double* x, const double* v, double* out) const {
    const int n = dim();
    B_.apply_jacobian(x, v, out);
    if (diag_damping_) {
      for (int i = 0; i < n; ++i) out[i] -= epsilon_ * a_diag_[i] * v[i];
    } else {
      Eigen::Map<const Eigen::VectorXd> vv(v, n);
      Eigen::Map<Eigen::VectorXd> ov(out, n);
      ov.noalias() -= epsilon_ * (A_ * vv);
    }
  }

  Eigen::MatrixXd drift_jacobian(const Eigen::VectorXd& x) const {
    require_dim(x);
    const int n = dim();
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
    for (int j = 0; j < n; ++j) {
      e[j] = 1.0;
      jacobian_apply_into(x.data(), e.data(), col.data());
      J.col(j) = col;
      e[j] = 0.0;
    }
    return J;
  }

  /// div X_0(x) = div B(x,x) - epsilon tr A; the bilinear part vanishes
  /// identically for every model this library builds, but is evaluated anyway.
  double drift_divergence(const Eigen::VectorXd& x) const {
    require_dim(x);
    return B_.divergence(x.data()) - epsilon_ * A_.trace();
  }

  /// Copy with a different damping parameter (used by epsilon sweeps).
  BilinearModel with_epsilon(double eps) const {
    return BilinearModel(B_, A_, forcing_, eps, scaling_, kind_, gnse_, exact_coeffs_);
  }

  nlohmann::json to_json() const;

 private:
  static void validate_spd(const Eigen::MatrixXd& A) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("BilinearModel: damping matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-12 * scale)
      throw std::invalid_argument("BilinearModel: damping matrix must be positive-definite");
  }

  void require_dim(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("BilinearModel: dimension mismatch");
  }

  /// Probabilistic check of the Euler-like contract x.B(x,x) = 0, div B = 0
  /// on deterministic pseudo-random states.
  void validate_euler_structure() const {
    const int n = dim();
    const double scale = std::max(1.0, B_.coeff_norm());
    std::uint64_t s = 0x6C0FFEE1F00Dull;
    Eigen::VectorXd x(n), b(n);
    for (int trial = 0; trial < 32; ++trial) {
      for (int i = 0; i < n; ++i) {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        x[i] = static_cast<double>(s >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      }
      B_.eval_quadratic(x.data(), b.data());
      if (std::abs(x.dot(b)) > 1e-10 * scale * std::max(1.0, x.squaredNorm()))
        throw std::invalid_argument("BilinearModel: bilinear drift must conserve energy");
      if (std::abs(B_.divergence(x.data())) > 1e-10 * scale * std::max(1.0, x.norm()))
        throw std::invalid_argument("BilinearModel: bilinear drift must be divergence-free");
    }
  }

  BilinearForm B_;
  Eigen::MatrixXd A_;
  std::vector<Eigen::VectorXd> forcing_;
  double epsilon_;
  Scaling scaling_;
  ModelKind kind_;
  std::optional<GNSEConfig> gnse_;
  bool exact_coeffs_;
  bool diag_damping_ = false;
  Eigen::VectorXd a_diag_;
  std::string fingerprint_;
};

// ---- free-function forms ----

inline Eigen::VectorXd eval_drift(const BilinearModel& m, const Eigen::VectorXd& x) {
  return m.drift(x);
}

inline Eigen::MatrixXd eval_drift_jacobian(const BilinearModel& m, const Eigen::VectorXd& x) {
  return m.drift_jacobian(x);
}

// ---- builders ----

/// Lorenz-96 drift B_l(x,x) = x_{l+1} x_{l-1} - x_{l-2} x_{l-1} with 1-based
/// cyclic indices mod n, damping A = I, forcing q_k e_k for every nonzero q_k.
inline BilinearModel build_l96(int n, const std::vector<double>& q, double epsilon = 0.1,
                               Scaling scaling = Scaling::FluctuationDissipation) {
  if (n < 4) throw std::invalid_argument("build_l96: n must be >= 4 (cyclic indices collide)");
  if (static_cast<int>(q.size()) > n)
    throw std::invalid_argument("build_l96: more amplitudes than coordinates");
  BilinearForm B(n);
  for (int l = 0; l < n; ++l) {
    B.add_term(l, (l + 1) % n, (l - 1 + n) % n, Rational(1));
    B.add_term(l, (l - 2 + n) % n, (l - 1 + n) % n, Rational(-1));
  }
  std::vector<Eigen::VectorXd> forcing;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] == 0.0) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[static_cast<int>(k)] = q[k];
    forcing.push_back(std::move(v));
  }
  if (forcing.empty()) throw std::invalid_argument("build_l96: all forcing amplitudes are zero");
  return BilinearModel(std::move(B), Eigen::MatrixXd::Identity(n, n), std::move(forcing), epsilon,
                       scaling, ModelKind::L96);
}

/// Linear benchmark (B = 0): Ornstein-Uhlenbeck with damping matrix A and
/// forcing q_k e_k for nonzero q_k. An all-zero (or empty) amplitude list
/// yields the deterministic decay x' = -eps A x.
inline BilinearModel build_linear(const Eigen::MatrixXd& A, const std::vector<double>& q,
                                  double epsilon = 0.1,
                                  Scaling scaling = Scaling::FluctuationDissipation) {
  const int n = static_cast<int>(A.rows());
  if (static_cast<int>(q.size()) > n)
    throw std::invalid_argument("build_linear: more amplitudes than coordinates");
  std::vector<Eigen::VectorXd> forcing;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] == 0.0) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[static_cast<int>(k)] = q[k];
    forcing.push_back(std::move(v));
  }
  return BilinearModel(BilinearForm(n), A, std::move(forcing), epsilon, scaling,
                       ModelKind::Linear);
}

inline BilinearModel build_ou(const std::vector<double>& a_diag, const std::vector<double>& q,
                              double epsilon = 0.1,
                              Scaling scaling = Scaling::FluctuationDissipation) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(a_diag.size(), a_diag.size());
  for (std::size_t i = 0; i < a_diag.size(); ++i) A(i, i) = a_diag[i];
  return build_linear(A, q, epsilon, scaling);
}

namespace detail {

/// Real chart of the complex lattice vector: one (Re, Im) coordinate pair per
/// half-lattice mode, w_{-k} = conj(w_k) implicit.
struct GNSERealChart {
  TruncatedLattice lattice;
  std::vector<LatticeIndex> half;  // half-lattice modes in lattice order
  std::vector<int> re_index;       // per half mode: coordinate of Re w_k
  std::vector<int> im_index;       //                coordinate of Im w_k

  explicit GNSERealChart(int N) : lattice(N) {
    for (const auto& k : lattice.points())
      if (k.in_half_lattice()) half.push_back(k);
    re_index.resize(half.size());
    im_index.resize(half.size());
    for (std::size_t p = 0; p < half.size(); ++p) {
      re_index[p] = static_cast<int>(2 * p);
      im_index[p] = static_cast<int>(2 * p + 1);
    }
  }

  int dim() const { return static_cast<int>(2 * half.size()); }

  int half_position(LatticeIndex k) const {
    const LatticeIndex rep = k.in_half_lattice() ? k : -k;
    for (std::size_t p = 0; p < half.size(); ++p)
      if (half[p] == rep) return static_cast<int>(p);
    return -1;
  }
};

}  // namespace detail

/// Galerkin 2d Navier-Stokes truncation in the real chart. The complex system
/// dw_k = (B_k(w,w) - eps |k|_r^2 w_k) dt + sqrt(eps) dW^k over the truncated
/// lattice is rewritten over (Re w_k, Im w_k) for half-lattice k; coefficients
/// stay exact rationals until the float compile at build.
inline BilinearModel build_gnse(const GNSEConfig& cfg, double epsilon = 0.1,
                                Scaling scaling = Scaling::FluctuationDissipation) {
  cfg.validate();
  const detail::GNSERealChart chart(cfg.N);
  const int n = chart.dim();
  BilinearForm B(n);
  const Rational half = make_rational(1, 2);

  // w_j = a_J + i s_J b_J with J the half-lattice representative of j.
  const auto re_of = [&](LatticeIndex j) { return chart.re_index[chart.half_position(j)]; };
  const auto im_of = [&](LatticeIndex j) { return chart.im_index[chart.half_position(j)]; };
  const auto sign_of = [](LatticeIndex j) { return j.in_half_lattice() ? 1 : -1; };

  for (const auto& k : chart.half) {
    const int row_re = re_of(k), row_im = im_of(k);
    for (const auto& j : chart.lattice.points()) {
      const LatticeIndex l = k - j;
      if (!chart.lattice.contains(l)) continue;
      const Rational c = advection_coeff(j, l, cfg.r);
      if (c.is_zero()) continue;
      const Rational w = half * c;  // the 1/2 from the symmetrized sum
      const int aj = re_of(j), bj = im_of(j), al = re_of(l), bl = im_of(l);
      const int sj = sign_of(j), sl = sign_of(l);
      // w_j w_l = (a_j a_l - s_j s_l b_j b_l) + i (s_l a_j b_l + s_j b_j a_l)
      B.add_term(row_re, aj, al, w);
      B.add_term(row_re, bj, bl, -Rational(sj * sl) * w);
      B.add_term(row_im, aj, bl, Rational(sl) * w);
      B.add_term(row_im, bj, al, Rational(sj) * w);
    }
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t p = 0; p < chart.half.size(); ++p) {
    const double nk = to_double(norm2_r(chart.half[p], cfg.r));
    A(chart.re_index[p], chart.re_index[p]) = nk;
    A(chart.im_index[p], chart.im_index[p]) = nk;
  }

  std::vector<Eigen::VectorXd> forcing;
  for (const auto& mode : cfg.forced) {
    if (!mode.k.in_half_lattice()) continue;  // the -k partner shares these streams
    Eigen::VectorXd va = Eigen::VectorXd::Zero(n), vb = Eigen::VectorXd::Zero(n);
    va[re_of(mode.k)] = mode.alpha;
    vb[im_of(mode.k)] = mode.beta;
    forcing.push_back(std::move(va));
    forcing.push_back(std::move(vb));
  }

  return BilinearModel(std::move(B), std::move(A), std::move(forcing), epsilon, scaling,
                       ModelKind::GNSE, cfg);
}

/// Copy with the noise removed; the deterministic flow of the same drift.
inline BilinearModel strip_forcing(const BilinearModel& m) {
  return BilinearModel(m.bilinear(), m.damping(), {}, m.epsilon(), m.scaling(), ModelKind::Custom,
                       m.gnse(), m.exact_coefficients());
}

/// Equivalent fluctuation-dissipation form of an unscaled model: the rescaled
/// system carries eps_hat = eps^{3/2} and sqrt(eps_hat)-scaled noise; exponent
/// estimates from the two forms agree after dividing by their own epsilon.
inline BilinearModel rescale_fd(const BilinearModel& m) {
  if (m.scaling() == Scaling::FluctuationDissipation)
    throw std::invalid_argument("rescale_fd: model already in fluctuation-dissipation form");
  return BilinearModel(m.bilinear(), m.damping(), m.forcing(), std::pow(m.epsilon(), 1.5),
                       Scaling::FluctuationDissipation, m.kind(), m.gnse(),
                       m.exact_coefficients());
}

// ---- config file round trip ----

inline nlohmann::json BilinearModel::to_json() const {
  nlohmann::json j;
  j["kind"] = lyap::to_string(kind_);
  j["epsilon"] = epsilon_;
  j["scaling"] = lyap::to_string(scaling_);
  switch (kind_) {
    case ModelKind::L96: {
      j["n"] = dim();
      nlohmann::json q = nlohmann::json::array();
      std::vector<double> amps(dim(), 0.0);
      for (const auto& v : forcing_)
        for (int i = 0; i < v.size(); ++i)
          if (v[i] != 0.0) amps[i] = v[i];
      int last = dim() - 1;
      while (last > 0 && amps[last] == 0.0) --last;
      for (int i = 0; i <= last; ++i) q.push_back(amps[i]);
      j["q"] = q;
      break;
    }
    case ModelKind::Linear: {
      j["n"] = dim();
      nlohmann::json a = nlohmann::json::array();
      for (int i = 0; i < dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < dim(); ++c) row.push_back(A_(i, c));
        a.push_back(row);
      }
      j["damping"] = a;
      nlohmann::json q = nlohmann::json::array();
      std::vector<double> amps(dim(), 0.0);
      for (const auto& v : forcing_)
        for (int i = 0; i < v.size(); ++i)
          if (v[i] != 0.0) amps[i] = v[i];
      for (double v : amps) q.push_back(v);
      j["q"] = q;
      break;
    }
    case ModelKind::GNSE: {
      j["N"] = gnse_->N;
      j["r"] = rational_to_string(gnse_->r);
      nlohmann::json modes = nlohmann::json::array();
      for (const auto& mode : gnse_->forced)
        modes.push_back({{"k", {mode.k.k1, mode.k.k2}}, {"alpha", mode.alpha}, {"beta", mode.beta}});
      j["forced"] = modes;
      break;
    }
    case ModelKind::Custom: {
      j["n"] = dim();
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : B_.terms())
        terms.push_back({t.out, t.j, t.k, rational_to_string(t.coeff)});
      j["terms"] = terms;
      j["exact"] = exact_coeffs_;
      nlohmann::json a = nlohmann::json::array();
      for (int i = 0; i < dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < dim(); ++c) row.push_back(A_(i, c));
        a.push_back(row);
      }
      j["damping"] = a;
      nlohmann::json fs = nlohmann::json::array();
      for (const auto& v : forcing_) {
        nlohmann::json fv = nlohmann::json::array();
        for (int i = 0; i < v.size(); ++i) fv.push_back(v[i]);
        fs.push_back(fv);
      }
      j["forcing"] = fs;
      break;
    }
  }
  return j;
}

inline Scaling scaling_from_string(const std::string& s) {
  if (s == "unscaled") return Scaling::Unscaled;
  if (s == "fluctuation-dissipation" || s == "fd") return Scaling::FluctuationDissipation;
  throw std::invalid_argument("unknown scaling '" + s + "'");
}

inline BilinearModel model_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double epsilon = j.at("epsilon").get<double>();
  const Scaling scaling = scaling_from_string(j.at("scaling").get<std::string>());
  if (kind == "l96")
    return build_l96(j.at("n").get<int>(), j.at("q").get<std::vector<double>>(), epsilon, scaling);
  if (kind == "linear") {
    const auto a = j.at("damping");
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) A(i, c) = a.at(i).at(c).get<double>();
    return build_linear(A, j.at("q").get<std::vector<double>>(), epsilon, scaling);
  }
  if (kind == "gnse") {
    GNSEConfig cfg;
    cfg.N = j.at("N").get<int>();
    cfg.r = parse_rational(j.at("r").get<std::string>());
    for (const auto& mode : j.at("forced"))
      cfg.forced.push_back({{mode.at("k").at(0).get<int>(), mode.at("k").at(1).get<int>()},
                            mode.at("alpha").get<double>(),
                            mode.at("beta").get<double>()});
    return build_gnse(cfg, epsilon, scaling);
  }
  if (kind == "custom") {
    const int n = j.at("n").get<int>();
    BilinearForm B(n);
    bool exact = true;
    for (const auto& t : j.at("terms")) {
      Rational c;
      if (t.at(3).is_string()) {
        c = parse_rational(t.at(3).get<std::string>());
      } else {
        // float-valued coefficient: representable exactly but flagged inexact,
        // since it did not come from an exact construction
        c = Rational(t.at(3).get<double>());
        exact = false;
      }
      B.add_term(t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>(), c);
    }
    if (j.contains("exact")) exact = exact && j.at("exact").get<bool>();
    const auto a = j.at("damping");
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) A(i, c) = a.at(i).at(c).get<double>();
    std::vector<Eigen::VectorXd> forcing;
    for (const auto& fv : j.at("forcing")) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = fv.at(i).get<double>();
      forcing.push_back(std::move(v));
    }
    return BilinearModel(std::move(B), std::move(A), std::move(forcing), epsilon, scaling,
                         ModelKind::Custom, std::nullopt, exact);
  }
  throw std::invalid_argument("unknown model kind '" + kind + "'");
}

}  // namespace lyap
