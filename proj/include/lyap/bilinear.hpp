#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lyap/rational.hpp"

namespace lyap {

/// Sparse symmetric bilinear map B : R^n x R^n -> R^n with exact rational
/// coefficients. The coefficient c attached to (out, {j,k}) contributes
/// c * (x_j y_k + x_k y_j) / 2 to B_out(x, y), i.e. c * x_j x_k to B_out(x, x).
/// Coefficients are stored exactly once per unordered pair; a float copy is
/// compiled for the integrator hot paths.
class BilinearForm {
 public:
  struct Term {
    int out, j, k;  // j <= k
    Rational coeff;
  };

  explicit BilinearForm(int n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("BilinearForm: dimension must be positive");
  }

  int dim() const { return n_; }

  /// Accumulates c onto the coefficient of (out, {j,k}); exact cancellation
  /// removes the term.
  void add_term(int out, int j, int k, const Rational& c) {
    check_index(out);
    check_index(j);
    check_index(k);
    if (c.is_zero()) return;
    if (j > k) std::swap(j, k);
    const auto key = std::tuple<int, int, int>(out, j, k);
    auto it = coeffs_.find(key);
    if (it == coeffs_.end()) {
      coeffs_.emplace(key, c);
    } else {
      it->second += c;
      if (it->second.is_zero()) coeffs_.erase(it);
    }
    compiled_.clear();
  }

  /// Flattens the coefficient map into POD terms for the float paths. Called
  /// once at model build; the form is immutable afterwards.
  void compile() const {
    compiled_.clear();
    compiled_.reserve(coeffs_.size());
    for (const auto& [key, c] : coeffs_) {
      const auto& [out, j, k] = key;
      compiled_.push_back({out, j, k, to_double(c)});
    }
  }

  bool empty() const { return coeffs_.empty(); }
  std::size_t term_count() const { return coeffs_.size(); }

  std::vector<Term> terms() const {
    std::vector<Term> out;
    out.reserve(coeffs_.size());
    for (const auto& [key, c] : coeffs_)
      out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c});
    return out;
  }

  /// sqrt(sum of squared coefficients); the scale used by tolerance tests.
  double coeff_norm() const {
    double s = 0;
    for (const auto& [key, c] : coeffs_) {
      const double v = to_double(c);
      s += v * v;
    }
    return std::sqrt(s);
  }

  // ---- float paths (require compile()) ----

  /// out = B(x, x)
  void eval_quadratic(const double* x, double* out) const {
    for (int i = 0; i < n_; ++i) out[i] = 0;
    for (const auto& t : compiled_) out[t.out] += t.c * x[t.j] * x[t.k];
  }

  /// out = 2 B(x, v), the derivative of x -> B(x,x) applied to v.
  void apply_jacobian(const double* x, const double* v, double* out) const {
    for (int i = 0; i < n_; ++i) out[i] = 0;
    for (const auto& t : compiled_) out[t.out] += t.c * (x[t.j] * v[t.k] + x[t.k] * v[t.j]);
  }

  /// B(x, y) as a vector.
  void eval_bilinear(const double* x, const double* y, double* out) const {
    for (int i = 0; i < n_; ++i) out[i] = 0;
    for (const auto& t : compiled_)
      out[t.out] += 0.5 * t.c * (x[t.j] * y[t.k] + x[t.k] * y[t.j]);
  }

  /// sum_l d_l B_l(x, x) = trace of the derivative matrix 2B(x, .).
  double divergence(const double* x) const {
    double s = 0;
    for (const auto& t : compiled_) {
      if (t.k == t.out) s += t.c * x[t.j];
      if (t.j == t.out) s += t.c * x[t.k];
    }
    return s;
  }

  // ---- exact paths ----

  std::vector<Rational> eval_quadratic_exact(std::span<const Rational> x) const {
    require_dim(x.size());
    std::vector<Rational> out(n_);
    for (const auto& [key, c] : coeffs_)
      out[std::get<0>(key)] += c * x[std::get<1>(key)] * x[std::get<2>(key)];
    return out;
  }

  std::vector<Rational> eval_bilinear_exact(std::span<const Rational> x,
                                            std::span<const Rational> y) const {
    require_dim(x.size());
    require_dim(y.size());
    std::vector<Rational> out(n_);
    const Rational half = make_rational(1, 2);
    for (const auto& [key, c] : coeffs_) {
      const auto& [o, j, k] = key;
      out[o] += half * c * (x[j] * y[k] + x[k] * y[j]);
    }
    return out;
  }

 private:
  struct CompiledTerm {
    std::int32_t out, j, k;
    double c;
  };

  void check_index(int i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("BilinearForm: index out of range");
  }
  void require_dim(std::size_t len) const {
    if (static_cast<int>(len) != n_) throw std::invalid_argument("BilinearForm: dimension mismatch");
  }

  int n_;
  std::map<std::tuple<int, int, int>, Rational> coeffs_;
  mutable std::vector<CompiledTerm> compiled_;
};

}  // namespace lyap
