#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wbary/measures.hpp"

namespace wbary {

struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

// Vertex solution of the transportation problem; at most m1 + m2 - 1 entries.
struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<PlanEntry> entries;
  double cost = 0.0;  // sum mass * |x_i - y_j|^2 / 2  (= W2^2 / 2)
};

// Dual potentials, feasibility phi_i + psi_j <= c_ij, equality on the plan
// support; normalized so min phi = 0.
struct DualPair {
  std::vector<double> phi;
  std::vector<double> psi;
  double dual_value = 0.0;  // <u, phi> + <v, psi>
};

struct DiscreteSolveOptions {
  std::size_t max_entries = 4'000'000;  // cap on m1 * m2
  double min_weight = 1e-15;            // below this after merging -> error; 0 disables
};

// Exact discrete-discrete OT via network simplex on the bipartite
// transportation polytope (block pricing, Bland fallback on degenerate runs).
// Duplicate atoms are merged first; the plan is reported on merged atoms.
std::pair<TransportPlan, DualPair> solve_discrete(const DiscreteMeasure& mu1,
                                                  const DiscreteMeasure& mu2,
                                                  const DiscreteSolveOptions& opts = {});

// psi_j = min_i (|x_i - y_j|^2/2 - phi_i), ties to lowest i. Points are
// row-major m x d.
std::vector<double> discrete_c_transform(std::span<const double> phi,
                                         std::span<const double> points1,
                                         std::span<const double> points2, int dim);

// Exhaustive permutation oracle for uniform instances with m <= 8.
double oracle_assignment(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2);

}  // namespace wbary
