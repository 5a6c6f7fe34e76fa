#pragma once

#include <deque>
#include <map>
#include <vector>

#include <json.hpp>

#include "lyap/rational_matrix.hpp"

namespace lyap {

/// Basis of the matrix Lie algebra generated by a set of matrices, together
/// with the bracket depth ("generation") at which each basis element entered.
struct ClosureResult {
  std::vector<RationalMatrix> basis;
  std::vector<int> generations;  // generations[i] is the depth of basis[i]; generators are 0
  int dim = 0;
  bool saturated = false;  // dim == n^2 - 1
  bool generators_traceless = true;
  int max_generation = 0;

  std::map<int, int> generation_histogram() const {
    std::map<int, int> h;
    for (int g : generations) ++h[g];
    return h;
  }

  /// True when `m` lies in the span of the computed basis.
  bool spans(const RationalMatrix& m) const {
    ExactRowEchelon ech;
    for (const auto& b : basis) ech.insert(vectorize_primitive(b));
    return ech.contains(vectorize_primitive(m));
  }
};

/// Iterated-bracket closure: repeatedly brackets the newest basis elements
/// against the generators (breadth-first over generations), inserting only
/// rank-increasing candidates, until no growth, saturation at n^2 - 1, or
/// max_depth. Left-normed brackets span the generated algebra, so candidates
/// of the form [basis, generator] suffice. Deterministic given input order;
/// termination is guaranteed because the rank is bounded by n^2.
inline ClosureResult lie_closure(const std::vector<RationalMatrix>& generators,
                                 int max_depth = 64) {
  if (max_depth < 1) throw std::invalid_argument("lie_closure: max_depth must be >= 1");
  ClosureResult result;
  if (generators.empty()) return result;

  const int n = generators.front().size();
  const int full_dim = n * n - 1;
  ExactRowEchelon ech;
  std::deque<std::size_t> queue;

  for (const auto& g : generators) {
    if (g.size() != n) throw std::invalid_argument("lie_closure: generator size mismatch");
    if (!g.trace().is_zero()) result.generators_traceless = false;
    if (ech.insert(vectorize_primitive(g))) {
      result.basis.push_back(g);
      result.generations.push_back(0);
      queue.push_back(result.basis.size() - 1);
    }
  }

  while (!queue.empty() && ech.rank() < full_dim) {
    const std::size_t at = queue.front();
    queue.pop_front();
    const int next_gen = result.generations[at] + 1;
    if (next_gen > max_depth) continue;
    for (const auto& g : generators) {
      RationalMatrix c = bracket(result.basis[at], g);
      if (c.is_zero()) continue;
      if (!ech.insert(vectorize_primitive(c))) continue;
      result.basis.push_back(std::move(c));
      result.generations.push_back(next_gen);
      result.max_generation = std::max(result.max_generation, next_gen);
      queue.push_back(result.basis.size() - 1);
      if (ech.rank() >= full_dim) break;
    }
  }

  result.dim = ech.rank();
  result.saturated = (result.dim == full_dim);
  return result;
}

/// Report shape used by the CLI certificates: {dim, saturated, generation histogram}.
inline nlohmann::json closure_report(const ClosureResult& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [gen, count] : r.generation_histogram()) hist[std::to_string(gen)] = count;
  return nlohmann::json{{"dim", r.dim},
                        {"saturated", r.saturated},
                        {"generators_traceless", r.generators_traceless},
                        {"max_generation", r.max_generation},
                        {"generation_histogram", hist}};
}

}  // namespace lyap
