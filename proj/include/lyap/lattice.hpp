#pragma once

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyap/rational.hpp"

namespace lyap {

/// Integer wavevector on the truncated lattice (origin excluded).
struct LatticeIndex {
  int k1 = 0;
  int k2 = 0;

  friend LatticeIndex operator+(LatticeIndex a, LatticeIndex b) {
    return {a.k1 + b.k1, a.k2 + b.k2};
  }
  friend LatticeIndex operator-(LatticeIndex a, LatticeIndex b) {
    return {a.k1 - b.k1, a.k2 - b.k2};
  }
  LatticeIndex operator-() const { return {-k1, -k2}; }
  friend bool operator==(LatticeIndex a, LatticeIndex b) = default;
  friend auto operator<=>(LatticeIndex a, LatticeIndex b) = default;

  bool is_zero() const { return k1 == 0 && k2 == 0; }
  int sup_norm() const { return std::max(std::abs(k1), std::abs(k2)); }
  long euclid_sq() const { return long(k1) * k1 + long(k2) * k2; }

  /// Half-lattice convention used for the real chart: k1 > 0, or k1 = 0 and k2 > 0.
  bool in_half_lattice() const { return k1 > 0 || (k1 == 0 && k2 > 0); }

  std::string str() const { return "(" + std::to_string(k1) + "," + std::to_string(k2) + ")"; }
};

/// |k|_r^2 = k1^2 + r^2 k2^2, exact for rational aspect ratio r.
inline Rational norm2_r(LatticeIndex k, const Rational& r) {
  return Rational(long(k.k1) * k.k1) + r * r * Rational(long(k.k2) * k.k2);
}

/// <j_perp, l>_r = r (j2 l1 - j1 l2).
inline Rational perp_pairing(LatticeIndex j, LatticeIndex l, const Rational& r) {
  return r * Rational(long(j.k2) * l.k1 - long(j.k1) * l.k2);
}

/// Advection coefficient c_{j,l} = <j_perp, l>_r (1/|l|_r^2 - 1/|j|_r^2).
/// Symmetric in (j, l); vanishes for parallel wavevectors and equal norms.
inline Rational advection_coeff(LatticeIndex j, LatticeIndex l, const Rational& r) {
  const Rational pairing = perp_pairing(j, l, r);
  if (pairing.is_zero()) return Rational(0);
  const Rational nj = norm2_r(j, r), nl = norm2_r(l, r);
  return pairing * (Rational(1) / nl - Rational(1) / nj);
}

/// The set {k in Z^2 \ {0} : max(|k1|, |k2|) <= N}, enumerated in a fixed
/// lexicographic order that doubles as the flat matrix-index bijection.
class TruncatedLattice {
 public:
  explicit TruncatedLattice(int N) : N_(N) {
    if (N < 1) throw std::invalid_argument("TruncatedLattice: N must be >= 1");
    const int side = 2 * N + 1;
    offsets_.assign(static_cast<std::size_t>(side) * side, -1);
    for (int k1 = -N; k1 <= N; ++k1)
      for (int k2 = -N; k2 <= N; ++k2) {
        if (k1 == 0 && k2 == 0) continue;
        offsets_[flat(k1, k2)] = static_cast<int>(points_.size());
        points_.push_back({k1, k2});
      }
  }

  int truncation() const { return N_; }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<LatticeIndex>& points() const { return points_; }

  bool contains(LatticeIndex k) const { return !k.is_zero() && k.sup_norm() <= N_; }

  /// Flat index of k, or -1 when k is outside the lattice.
  int index_of(LatticeIndex k) const { return contains(k) ? offsets_[flat(k.k1, k.k2)] : -1; }

  /// Points ordered by Euclidean radius (ties broken lexicographically):
  /// the deterministic small-|k|-first witness search order.
  std::vector<LatticeIndex> by_radius() const {
    std::vector<LatticeIndex> out = points_;
    std::sort(out.begin(), out.end(), [](LatticeIndex a, LatticeIndex b) {
      if (a.euclid_sq() != b.euclid_sq()) return a.euclid_sq() < b.euclid_sq();
      return a < b;
    });
    return out;
  }

 private:
  std::size_t flat(int k1, int k2) const {
    return static_cast<std::size_t>(k1 + N_) * (2 * N_ + 1) + (k2 + N_);
  }

  int N_;
  std::vector<LatticeIndex> points_;
  std::vector<int> offsets_;
};

}  // namespace lyap
