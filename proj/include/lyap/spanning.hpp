#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyap/lattice.hpp"
#include "lyap/lie_closure.hpp"
#include "lyap/model.hpp"
#include "lyap/parallel.hpp"
#include "lyap/rational_matrix.hpp"

namespace lyap {

/// Constant matrices H^k = grad [d/dx_k, B], one per coordinate: the exact
/// second derivatives of the bilinear drift. Their generated matrix Lie
/// algebra decides projective spanning for bilinear models. For the lattice
/// models the family is indexed by wavevectors through a recorded bijection.
struct HkFamily {
  std::string model_fingerprint;
  int n = 0;  // matrix size
  std::vector<RationalMatrix> matrices;
  std::vector<std::string> labels;  // coordinate names, "3" or "(1,0)"
  std::optional<TruncatedLattice> lattice;  // complex-lattice chart (GNSE)
  std::optional<Rational> r;

  int index_of(LatticeIndex k) const {
    if (!lattice) throw std::logic_error("HkFamily: no lattice chart");
    return lattice->index_of(k);
  }
};

/// GNSE family in the complex-lattice chart: (H^k)_{l,j} = c_{j,k} on the
/// band l = j + k, real rational entries, traceless by construction.
inline HkFamily build_gnse_Hk(int N, const Rational& r) {
  if (N < 1) throw std::invalid_argument("build_gnse_Hk: N must be >= 1");
  if (r <= 0) throw std::invalid_argument("build_gnse_Hk: aspect ratio must be positive");
  HkFamily fam;
  fam.lattice.emplace(N);
  fam.r = r;
  fam.n = fam.lattice->size();
  const auto& points = fam.lattice->points();
  fam.matrices.reserve(points.size());
  for (const auto& k : points) {
    RationalMatrix H(fam.n);
    for (int jidx = 0; jidx < fam.n; ++jidx) {
      const LatticeIndex j = points[static_cast<std::size_t>(jidx)];
      const int lidx = fam.lattice->index_of(j + k);
      if (lidx < 0) continue;
      const Rational c = advection_coeff(j, k, r);
      if (!c.is_zero()) H(lidx, jidx) = c;
    }
    fam.matrices.push_back(std::move(H));
    fam.labels.push_back(k.str());
  }
  return fam;
}

/// H^k read off the exact coefficient map: (H^k)_{l,j} = d_j d_k B_l.
/// GNSE models use the complex-lattice chart; everything else the real chart
/// of the stored bilinear form.
inline HkFamily build_Hk(const BilinearModel& m) {
  if (!m.exact_coefficients())
    throw std::invalid_argument("build_Hk: model lacks exact rational coefficients");
  if (m.kind() == ModelKind::GNSE) {
    auto fam = build_gnse_Hk(m.gnse()->N, m.gnse()->r);
    fam.model_fingerprint = m.fingerprint();
    return fam;
  }
  HkFamily fam;
  fam.model_fingerprint = m.fingerprint();
  fam.n = m.dim();
  fam.matrices.assign(static_cast<std::size_t>(fam.n), RationalMatrix(fam.n));
  for (int k = 0; k < fam.n; ++k) fam.labels.push_back(std::to_string(k + 1));
  for (const auto& t : m.bilinear().terms()) {
    if (t.j == t.k) {
      fam.matrices[static_cast<std::size_t>(t.j)](t.out, t.j) += 2 * t.coeff;
    } else {
      fam.matrices[static_cast<std::size_t>(t.j)](t.out, t.k) += t.coeff;
      fam.matrices[static_cast<std::size_t>(t.k)](t.out, t.j) += t.coeff;
    }
  }
  return fam;
}

/// Closed-form diagonals D^k_i = c_{i,k} c_{i+k,k} 1(i+k) - c_{i,k} c_{i-k,k}
/// 1(i-k), indexed like the lattice points.
inline std::vector<std::vector<Rational>> dk_closed_form(const TruncatedLattice& lattice,
                                                         const Rational& r) {
  const auto& points = lattice.points();
  std::vector<std::vector<Rational>> table(points.size());
  for (std::size_t kpos = 0; kpos < points.size(); ++kpos) {
    const LatticeIndex k = points[kpos];
    auto& row = table[kpos];
    row.resize(points.size());
    for (std::size_t ipos = 0; ipos < points.size(); ++ipos) {
      const LatticeIndex i = points[ipos];
      const Rational cik = advection_coeff(i, k, r);
      if (cik.is_zero()) continue;
      Rational v;
      if (lattice.contains(i + k)) v += cik * advection_coeff(i + k, k, r);
      if (lattice.contains(i - k)) v -= cik * advection_coeff(i - k, k, r);
      row[ipos] = std::move(v);
    }
  }
  return table;
}

/// The same diagonals by the independent commutator route [H^k, H^{-k}].
inline std::vector<std::vector<Rational>> dk_from_commutators(const HkFamily& fam) {
  if (!fam.lattice) throw std::invalid_argument("dk_from_commutators: needs the lattice chart");
  const auto& points = fam.lattice->points();
  std::vector<std::vector<Rational>> table(points.size());
  for (std::size_t kpos = 0; kpos < points.size(); ++kpos) {
    const int neg = fam.lattice->index_of(-points[kpos]);
    if (neg < 0) throw std::logic_error("dk_from_commutators: lattice not symmetric");
    const RationalMatrix C =
        bracket(fam.matrices[kpos], fam.matrices[static_cast<std::size_t>(neg)]);
    auto& row = table[kpos];
    row.resize(points.size());
    for (int i = 0; i < fam.n; ++i) {
      for (int j = 0; j < fam.n; ++j)
        if (i != j && !C(i, j).is_zero())
          throw std::runtime_error("dk_from_commutators: [H^k, H^-k] is not diagonal");
      row[static_cast<std::size_t>(i)] = C(i, i);
    }
  }
  return table;
}

/// Diagonal family {D^k}: computed twice, once in closed form and once as the
/// exact commutator; any mismatch is an indexing bug and a hard failure.
inline std::vector<std::vector<Rational>> build_Dk(const HkFamily& fam) {
  if (!fam.lattice || !fam.r)
    throw std::invalid_argument("build_Dk: needs a GNSE family with lattice chart");
  auto closed = dk_closed_form(*fam.lattice, *fam.r);
  const auto commutator = dk_from_commutators(fam);
  if (closed != commutator)
    throw std::runtime_error("build_Dk: closed form and commutator disagree (indexing bug)");
  return closed;
}

// ---- distinctness condition ----

struct Quadruple {
  LatticeIndex i, j, l, m;
  std::string str() const { return i.str() + j.str() + l.str() + m.str(); }
};

struct DistinctnessReport {
  int N = 0;
  Rational r = 1;
  std::int64_t examined = 0;   // quadruples with i+j+l+m = 0 inside the lattice
  std::int64_t excluded = 0;   // removed by the pairing constraints
  std::int64_t satisfied = 0;  // some k gives a nonzero diagonal sum
  std::vector<Quadruple> violations;  // no witnessing k (exhaustive)
  std::map<std::string, std::int64_t> witness_counts;  // witness k -> settled count
  std::vector<std::pair<Quadruple, LatticeIndex>> witness_samples;  // capped
  double seconds = 0;
};

/// Exhaustive exact scan of the distinctness condition at truncation N and
/// aspect ratio r: every ordered quadruple (i,j,l,m) with zero sum is either
/// excluded by the pairing constraints (i+j = 0, i+l = 0 or j+l = 0 forces the
/// corresponding factor pair to vanish), or must admit a witness k with
/// D^k_i + D^k_j + D^k_l + D^k_m != 0. Witnesses are searched outward from
/// small |k| and tallied; violations are recorded exhaustively. The
/// enumeration prunes by drawing (i,j,l) and solving m = -i-j-l; work is
/// split over the outermost index with per-worker tallies merged in order.
inline DistinctnessReport check_distinctness(int N, const Rational& r, int jobs = 1,
                                             std::ostream* progress = nullptr,
                                             std::size_t witness_sample_cap = 64) {
  if (N < 8) throw std::invalid_argument("check_distinctness: requires N >= 8");
  const auto t0 = std::chrono::steady_clock::now();
  const TruncatedLattice lattice(N);
  const auto& points = lattice.points();
  const int count = lattice.size();
  if (progress)
    *progress << "distinctness N=" << N << " r=" << rational_to_string(r) << ": " << count
              << " lattice points, up to " << static_cast<double>(count) * count * count
              << " ordered triples\n";

  const auto table = dk_closed_form(lattice, r);
  const auto spiral = lattice.by_radius();
  std::vector<int> spiral_idx(spiral.size());
  for (std::size_t s = 0; s < spiral.size(); ++s)
    spiral_idx[s] = lattice.index_of(spiral[s]);

  struct WorkerTally {
    std::int64_t examined = 0, excluded = 0, satisfied = 0;
    std::vector<Quadruple> violations;
    std::vector<std::int64_t> witness_counts;
    std::vector<std::pair<Quadruple, LatticeIndex>> samples;
  };
  std::vector<WorkerTally> tallies(static_cast<std::size_t>(count));

  parallel_for(count, jobs, [&](std::int64_t ipos) {
    WorkerTally& tally = tallies[static_cast<std::size_t>(ipos)];
    tally.witness_counts.assign(static_cast<std::size_t>(count), 0);
    const LatticeIndex i = points[static_cast<std::size_t>(ipos)];
    const auto& di_rows = table;  // alias for readability
    for (int jpos = 0; jpos < count; ++jpos) {
      const LatticeIndex j = points[static_cast<std::size_t>(jpos)];
      const bool ij_paired = (i + j).is_zero();
      for (int lpos = 0; lpos < count; ++lpos) {
        const LatticeIndex l = points[static_cast<std::size_t>(lpos)];
        const LatticeIndex m = -(i + j + l);
        const int mpos = lattice.index_of(m);
        if (mpos < 0) continue;
        ++tally.examined;
        if (ij_paired || (i + l).is_zero() || (j + l).is_zero()) {
          ++tally.excluded;
          continue;
        }
        bool witnessed = false;
        for (std::size_t s = 0; s < spiral_idx.size(); ++s) {
          const int kpos = spiral_idx[s];
          const auto& row = di_rows[static_cast<std::size_t>(kpos)];
          Rational sum = row[static_cast<std::size_t>(ipos)];
          sum += row[static_cast<std::size_t>(jpos)];
          sum += row[static_cast<std::size_t>(lpos)];
          sum += row[static_cast<std::size_t>(mpos)];
          if (!sum.is_zero()) {
            ++tally.satisfied;
            ++tally.witness_counts[static_cast<std::size_t>(kpos)];
            if (tally.samples.size() < 4)
              tally.samples.push_back({{i, j, l, m}, spiral[s]});
            witnessed = true;
            break;
          }
        }
        if (!witnessed) tally.violations.push_back({i, j, l, m});
      }
    }
  });

  DistinctnessReport report;
  report.N = N;
  report.r = r;
  std::vector<std::int64_t> witness_by_pos(static_cast<std::size_t>(count), 0);
  for (const auto& tally : tallies) {
    report.examined += tally.examined;
    report.excluded += tally.excluded;
    report.satisfied += tally.satisfied;
    report.violations.insert(report.violations.end(), tally.violations.begin(),
                             tally.violations.end());
    for (std::size_t k = 0; k < tally.witness_counts.size(); ++k)
      witness_by_pos[k] += tally.witness_counts[k];
    for (const auto& s : tally.samples)
      if (report.witness_samples.size() < witness_sample_cap) report.witness_samples.push_back(s);
  }
  for (int k = 0; k < count; ++k)
    if (witness_by_pos[static_cast<std::size_t>(k)] > 0)
      report.witness_counts[points[static_cast<std::size_t>(k)].str()] =
          witness_by_pos[static_cast<std::size_t>(k)];
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (progress)
    *progress << "distinctness: examined " << report.examined << ", excluded " << report.excluded
              << ", satisfied " << report.satisfied << ", violations "
              << report.violations.size() << " (" << report.seconds << " s)\n";
  return report;
}

/// Independent recomputation of every reported violation: rebuilds the D^k
/// diagonals by the commutator route and re-scans all k from scratch. True
/// when every violation reproduces (no witness exists).
inline bool reverify_violations(const DistinctnessReport& report, int jobs = 1) {
  if (report.violations.empty()) return true;
  const TruncatedLattice lattice(report.N);
  const auto fam = build_gnse_Hk(report.N, report.r);
  const auto table = dk_from_commutators(fam);
  std::vector<char> reproduced(report.violations.size(), 0);
  parallel_for(static_cast<std::int64_t>(report.violations.size()), jobs, [&](std::int64_t v) {
    const auto& quad = report.violations[static_cast<std::size_t>(v)];
    const int ip = lattice.index_of(quad.i), jp = lattice.index_of(quad.j),
              lp = lattice.index_of(quad.l), mp = lattice.index_of(quad.m);
    for (const auto& row : table) {
      Rational sum = row[static_cast<std::size_t>(ip)];
      sum += row[static_cast<std::size_t>(jp)];
      sum += row[static_cast<std::size_t>(lp)];
      sum += row[static_cast<std::size_t>(mp)];
      if (!sum.is_zero()) return;  // a witness exists after all
    }
    reproduced[static_cast<std::size_t>(v)] = 1;
  });
  return std::all_of(reproduced.begin(), reproduced.end(), [](char c) { return c != 0; });
}

// ---- forcing propagation ----

struct ZnPropagation {
  std::vector<std::vector<LatticeIndex>> generations;  // generations[0] = Z^0
  bool full = false;
};

/// Fixpoint of Z^{n+1} = Z^n union {j+k : j in Z^0, k in Z^n, c_{j,k} != 0},
/// inside the truncated lattice; full when the fixpoint is the whole lattice.
inline ZnPropagation zn_propagation(const GNSEConfig& cfg) {
  cfg.validate();
  const TruncatedLattice lattice(cfg.N);
  std::vector<char> in_set(static_cast<std::size_t>(lattice.size()), 0);
  ZnPropagation out;
  std::vector<LatticeIndex> frontier;
  for (const auto& k : cfg.forced_set()) {
    const int idx = lattice.index_of(k);
    if (idx >= 0 && !in_set[static_cast<std::size_t>(idx)]) {
      in_set[static_cast<std::size_t>(idx)] = 1;
      frontier.push_back(k);
    }
  }
  std::sort(frontier.begin(), frontier.end());
  out.generations.push_back(frontier);
  const auto seeds = out.generations.front();
  while (!frontier.empty()) {
    std::vector<LatticeIndex> next;
    for (const auto& k : frontier) {
      for (const auto& j : seeds) {
        const LatticeIndex l = j + k;
        const int idx = lattice.index_of(l);
        if (idx < 0 || in_set[static_cast<std::size_t>(idx)]) continue;
        if (advection_coeff(j, k, cfg.r).is_zero()) continue;
        in_set[static_cast<std::size_t>(idx)] = 1;
        next.push_back(l);
      }
    }
    std::sort(next.begin(), next.end());
    if (next.empty()) break;
    out.generations.push_back(next);
    frontier = std::move(next);
  }
  std::size_t total = 0;
  for (const auto& gen : out.generations) total += gen.size();
  out.full = total == static_cast<std::size_t>(lattice.size());
  return out;
}

/// Exact closure of {H^k}; saturated means the family generates the full
/// traceless matrix algebra (dim n^2 - 1).
inline ClosureResult verify_sl_generation(const HkFamily& fam, int max_depth = 64) {
  return lie_closure(fam.matrices, max_depth);
}

// ---- certificates ----

inline nlohmann::json distinctness_to_json(const DistinctnessReport& report) {
  nlohmann::json j;
  j["model"] = "gnse";
  j["N"] = report.N;
  j["r"] = rational_to_string(report.r);
  j["examined"] = report.examined;
  j["excluded"] = report.excluded;
  j["satisfied"] = report.satisfied;
  j["verdict"] = report.violations.empty() ? "satisfied" : "violations";
  nlohmann::json viols = nlohmann::json::array();
  for (const auto& q : report.violations)
    viols.push_back({{q.i.k1, q.i.k2}, {q.j.k1, q.j.k2}, {q.l.k1, q.l.k2}, {q.m.k1, q.m.k2}});
  j["violations"] = viols;
  nlohmann::json witnesses = nlohmann::json::object();
  for (const auto& [k, c] : report.witness_counts) witnesses[k] = c;
  j["witness_map"] = witnesses;
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [q, k] : report.witness_samples)
    samples.push_back({{"quadruple", q.str()}, {"witness", k.str()}});
  j["witness_samples"] = samples;
  j["seconds"] = report.seconds;
  return j;
}

inline nlohmann::json spanning_certificate(const HkFamily& fam, const ClosureResult& closure) {
  nlohmann::json j = closure_report(closure);
  j["model"] = fam.model_fingerprint;
  j["n"] = fam.n;
  j["target_dim"] = fam.n * fam.n - 1;
  j["verdict"] = closure.saturated ? "saturated" : "not-saturated";
  j["generators"] = fam.labels.size();
  if (fam.r) j["r"] = rational_to_string(*fam.r);
  if (fam.lattice) j["N"] = fam.lattice->truncation();
  return j;
}

inline nlohmann::json zn_to_json(const ZnPropagation& zn) {
  nlohmann::json j;
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& gen : zn.generations) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& k : gen) g.push_back({k.k1, k.k2});
    gens.push_back(g);
  }
  j["generations"] = gens;
  j["full"] = zn.full;
  return j;
}

}  // namespace lyap
