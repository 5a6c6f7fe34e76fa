#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lyap/rational.hpp"

namespace lyap {

/// Dense square matrix of exact rationals. Entries are kept normalized by the
/// underlying rational type (gcd-reduced, positive denominator). Row/column
/// indices are plain integers; callers that index by lattice wavevectors keep
/// the bijection alongside (see HkFamily).
class RationalMatrix {
 public:
  RationalMatrix() = default;
  explicit RationalMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {
    if (n <= 0) throw std::invalid_argument("RationalMatrix: size must be positive");
  }

  static RationalMatrix identity(int n) {
    RationalMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  /// Single 1 in row i, column j.
  static RationalMatrix elementary(int n, int i, int j) {
    RationalMatrix m(n);
    m(i, j) = 1;
    return m;
  }

  int size() const { return n_; }

  const Rational& operator()(int i, int j) const { return a_[idx(i, j)]; }
  Rational& operator()(int i, int j) { return a_[idx(i, j)]; }

  Rational trace() const {
    Rational t;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](const Rational& q) { return q.is_zero(); });
  }

  bool operator==(const RationalMatrix& other) const = default;

  RationalMatrix& operator+=(const RationalMatrix& other) {
    require_same_size(other);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
    return *this;
  }

  RationalMatrix& operator-=(const RationalMatrix& other) {
    require_same_size(other);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= other.a_[i];
    return *this;
  }

  RationalMatrix& operator*=(const Rational& s) {
    for (auto& q : a_) q *= s;
    return *this;
  }

  /// Nonzero entries as (row, col) pairs in row-major order.
  std::vector<std::pair<int, int>> nonzeros() const {
    std::vector<std::pair<int, int>> nz;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (!(*this)(i, j).is_zero()) nz.emplace_back(i, j);
    return nz;
  }

 private:
  std::size_t idx(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
      throw std::out_of_range("RationalMatrix: index out of range");
    return static_cast<std::size_t>(i) * n_ + j;
  }
  void require_same_size(const RationalMatrix& other) const {
    if (n_ != other.n_) throw std::invalid_argument("RationalMatrix: size mismatch");
  }

  int n_ = 0;
  std::vector<Rational> a_;
};

inline RationalMatrix operator+(RationalMatrix a, const RationalMatrix& b) { return a += b; }
inline RationalMatrix operator-(RationalMatrix a, const RationalMatrix& b) { return a -= b; }

/// Commutator [A,B] = AB - BA in exact arithmetic. Walks the nonzero pattern,
/// so banded inputs cost far less than a dense triple loop.
inline RationalMatrix bracket(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("bracket: size mismatch");
  const int n = a.size();
  RationalMatrix c(n);
  for (const auto& [i, k] : a.nonzeros()) {
    const Rational& av = a(i, k);
    for (int j = 0; j < n; ++j) {
      const Rational& bv = b(k, j);
      if (!bv.is_zero()) c(i, j) += av * bv;
    }
  }
  for (const auto& [i, k] : b.nonzeros()) {
    const Rational& bv = b(i, k);
    for (int j = 0; j < n; ++j) {
      const Rational& av = a(k, j);
      if (!av.is_zero()) c(i, j) -= bv * av;
    }
  }
  return c;
}

/// Sparse integer vector: sorted coordinate/value pairs, no explicit zeros.
/// This is the working representation inside the fraction-free elimination.
struct SparseIntVector {
  std::vector<std::pair<std::int64_t, BigInt>> entries;

  bool empty() const { return entries.empty(); }
  std::int64_t lead_index() const { return entries.front().first; }
  const BigInt& lead_value() const { return entries.front().second; }

  /// Divide out the content (gcd of all values); keeps the vector primitive so
  /// intermediate entries stay small across eliminations.
  void normalize_content() {
    if (entries.empty()) return;
    BigInt g = 0;
    for (const auto& [i, v] : entries) {
      g = boost::multiprecision::gcd(g, v);
      if (g == 1) break;
    }
    if (g < 0) g = -g;
    const bool flip = entries.front().second < 0;
    if (g == 1 && !flip) return;
    for (auto& [i, v] : entries) {
      if (g != 1) v /= g;
      if (flip) v = -v;
    }
  }
};

/// alpha * a - beta * b over the merged support, dropping exact zeros.
inline SparseIntVector linear_combine(const BigInt& alpha, const SparseIntVector& a,
                                      const BigInt& beta, const SparseIntVector& b) {
  SparseIntVector out;
  out.entries.reserve(a.entries.size() + b.entries.size());
  std::size_t ia = 0, ib = 0;
  while (ia < a.entries.size() || ib < b.entries.size()) {
    if (ib == b.entries.size() ||
        (ia < a.entries.size() && a.entries[ia].first < b.entries[ib].first)) {
      out.entries.emplace_back(a.entries[ia].first, alpha * a.entries[ia].second);
      ++ia;
    } else if (ia == a.entries.size() || b.entries[ib].first < a.entries[ia].first) {
      out.entries.emplace_back(b.entries[ib].first, -beta * b.entries[ib].second);
      ++ib;
    } else {
      BigInt v = alpha * a.entries[ia].second - beta * b.entries[ib].second;
      if (!v.is_zero()) out.entries.emplace_back(a.entries[ia].first, std::move(v));
      ++ia;
      ++ib;
    }
  }
  return out;
}

/// Clears denominators and strips content: the direction of the vectorized
/// matrix, as a primitive integer vector. Rank is unaffected by the scaling.
inline SparseIntVector vectorize_primitive(const RationalMatrix& m) {
  SparseIntVector v;
  BigInt lcm = 1;
  const int n = m.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Rational& q = m(i, j);
      if (!q.is_zero()) lcm = boost::multiprecision::lcm(lcm, denominator(q));
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Rational& q = m(i, j);
      if (!q.is_zero())
        v.entries.emplace_back(static_cast<std::int64_t>(i) * n + j,
                               numerator(q) * (lcm / denominator(q)));
    }
  v.normalize_content();
  return v;
}

/// Incremental exact rank tracker: fraction-free (cross-multiplication)
/// elimination over primitive integer rows, one pivot row per leading index.
/// Deterministic: the stored echelon depends only on the insertion order.
class ExactRowEchelon {
 public:
  int rank() const { return static_cast<int>(pivots_.size()); }

  /// Reduces `row` against the current pivots; stores it and returns true if
  /// it is independent of everything inserted so far.
  bool insert(SparseIntVector row) {
    reduce(row);
    if (row.empty()) return false;
    row.normalize_content();
    const std::int64_t lead = row.lead_index();
    pivots_.emplace(lead, std::move(row));
    return true;
  }

  /// Span-membership test; does not modify the echelon.
  bool contains(SparseIntVector row) const {
    reduce(row);
    return row.empty();
  }

 private:
  void reduce(SparseIntVector& row) const {
    while (!row.empty()) {
      const auto it = pivots_.find(row.lead_index());
      if (it == pivots_.end()) return;
      row = linear_combine(it->second.lead_value(), row, row.lead_value(), it->second);
      row.normalize_content();
    }
  }

  std::map<std::int64_t, SparseIntVector> pivots_;
};

/// Exact rank of the span of the vectorized matrices.
inline int span_rank(std::span<const RationalMatrix> mats) {
  if (mats.empty()) return 0;
  const int n = mats.front().size();
  ExactRowEchelon ech;
  for (const auto& m : mats) {
    if (m.size() != n) throw std::invalid_argument("span_rank: size mismatch");
    ech.insert(vectorize_primitive(m));
  }
  return ech.rank();
}

inline int span_rank(const std::vector<RationalMatrix>& mats) {
  return span_rank(std::span<const RationalMatrix>(mats));
}

/// JSON form: {"n": n, "entries": [[i, j, "p/q"], ...]} with only nonzeros.
inline void to_json(nlohmann::json& j, const RationalMatrix& m) {
  j = nlohmann::json{{"n", m.size()}, {"entries", nlohmann::json::array()}};
  for (const auto& [r, c] : m.nonzeros())
    j["entries"].push_back({r, c, rational_to_string(m(r, c))});
}

inline void from_json(const nlohmann::json& j, RationalMatrix& m) {
  m = RationalMatrix(j.at("n").get<int>());
  for (const auto& e : j.at("entries"))
    m(e.at(0).get<int>(), e.at(1).get<int>()) = parse_rational(e.at(2).get<std::string>());
}

}  // namespace lyap
