#include "wbary/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wbary/errors.hpp"

namespace wbary {

namespace {

double pair_cost(const double* x, const double* y, int d) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) {
    const double t = x[a] - y[a];
    s += t * t;
  }
  return 0.5 * s;
}

// Network simplex specialized to the dense bipartite transportation problem.
// Nodes 0..n1-1 are sources, n1..n1+n2-1 sinks; the basis is a spanning tree
// held in parent form with the flow stored on the child end of each arc.
class TransportSimplex {
 public:
  TransportSimplex(const DiscreteMeasure& a, const DiscreteMeasure& b)
      : n1_(a.size()), n2_(b.size()), N_(n1_ + n2_), mu_(a), nu_(b) {
    cost_.resize(n1_ * n2_);
    double cmax = 0.0;
    for (std::size_t i = 0; i < n1_; ++i)
      for (std::size_t j = 0; j < n2_; ++j) {
        const double c = pair_cost(a.point(i), b.point(j), a.dim);
        cost_[i * n2_ + j] = c;
        cmax = std::max(cmax, c);
      }
    eps_ = 1e-11 * (1.0 + cmax);
    parent_.assign(N_, -1);
    depth_.assign(N_, 0);
    flow_.assign(N_, 0.0);
    pot_.assign(N_, 0.0);
    build_initial_tree();
    compute_duals();
  }

  void run() {
    const std::size_t arc_count = n1_ * n2_;
    const std::size_t block = std::max<std::size_t>(64, arc_count / 64);
    std::size_t cursor = 0;
    long degenerate_run = 0;
    const long bland_after = 4 * static_cast<long>(N_);

    while (true) {
      long enter = -1;
      if (degenerate_run > bland_after) {
        // Bland-style: first violating arc in fixed order
        for (std::size_t k = 0; k < arc_count; ++k) {
          if (reduced(k) < -eps_) {
            enter = static_cast<long>(k);
            break;
          }
        }
      } else {
        // block pricing: most negative arc within scanned blocks
        double best = -eps_;
        std::size_t scanned = 0;
        while (scanned < arc_count) {
          const std::size_t b0 = cursor;
          const std::size_t b1 = std::min(arc_count, b0 + block);
          for (std::size_t k = b0; k < b1; ++k) {
            const double r = reduced(k);
            if (r < best) {
              best = r;
              enter = static_cast<long>(k);
            }
          }
          scanned += b1 - b0;
          cursor = b1 < arc_count ? b1 : 0;
          if (enter >= 0) break;
        }
      }
      if (enter < 0) break;  // optimal

      const bool progressed = pivot(static_cast<std::size_t>(enter));
      degenerate_run = progressed ? 0 : degenerate_run + 1;
      compute_duals();
    }
  }

  std::pair<TransportPlan, DualPair> extract() const {
    TransportPlan plan;
    plan.rows = n1_;
    plan.cols = n2_;
    for (std::size_t c = 1; c < N_; ++c) {
      if (parent_[c] < 0 || flow_[c] <= 0.0) continue;
      const auto [i, j] = arc_of(c);
      plan.entries.push_back({i, j, flow_[c]});
      plan.cost += flow_[c] * cost_[i * n2_ + j];
    }
    std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });

    DualPair duals;
    duals.phi.assign(pot_.begin(), pot_.begin() + static_cast<long>(n1_));
    duals.psi.assign(pot_.begin() + static_cast<long>(n1_), pot_.end());
    const double mn = *std::min_element(duals.phi.begin(), duals.phi.end());
    for (double& p : duals.phi) p -= mn;
    for (double& p : duals.psi) p += mn;
    duals.dual_value = 0.0;
    for (std::size_t i = 0; i < n1_; ++i) duals.dual_value += mu_.weights[i] * duals.phi[i];
    for (std::size_t j = 0; j < n2_; ++j) duals.dual_value += nu_.weights[j] * duals.psi[j];
    return {std::move(plan), std::move(duals)};
  }

 private:
  std::size_t n1_, n2_, N_;
  const DiscreteMeasure& mu_;
  const DiscreteMeasure& nu_;
  std::vector<double> cost_;
  double eps_ = 0.0;
  std::vector<long> parent_;
  std::vector<int> depth_;
  std::vector<double> flow_;  // flow on arc (node, parent[node])
  std::vector<double> pot_;

  double reduced(std::size_t arc) const {
    const std::size_t i = arc / n2_;
    const std::size_t j = arc % n2_;
    return cost_[arc] - pot_[i] - pot_[n1_ + j];
  }

  std::pair<std::size_t, std::size_t> arc_of(std::size_t child) const {
    const std::size_t p = static_cast<std::size_t>(parent_[child]);
    return child < n1_ ? std::make_pair(child, p - n1_) : std::make_pair(p, child - n1_);
  }

  // Northwest-corner initial basis: a staircase spanning tree.
  void build_initial_tree() {
    std::vector<double> arc_flow_store;
    std::vector<std::pair<std::size_t, std::size_t>> arcs;  // (source, sink)
    double ru = mu_.weights[0];
    double rv = nu_.weights[0];
    std::size_t i = 0, j = 0;
    while (true) {
      const double t = std::max(0.0, std::min(ru, rv));
      arcs.emplace_back(i, j);
      arc_flow_store.push_back(t);
      ru -= t;
      rv -= t;
      if (i + 1 == n1_ && j + 1 == n2_) break;
      // advance one side only, so exactly n1 + n2 - 1 arcs are created
      if (i + 1 == n1_) {
        ++j;
        rv = nu_.weights[j];
      } else if (j + 1 == n2_) {
        ++i;
        ru = mu_.weights[i];
      } else if (ru <= rv) {
        ++i;
        ru = mu_.weights[i];
      } else {
        ++j;
        rv = nu_.weights[j];
      }
    }
    rebuild_tree(arcs, arc_flow_store);
  }

  void rebuild_tree(const std::vector<std::pair<std::size_t, std::size_t>>& arcs,
                    const std::vector<double>& arc_flow) {
    std::vector<std::vector<std::pair<long, double>>> adj(N_);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const long s = static_cast<long>(arcs[k].first);
      const long t = static_cast<long>(n1_ + arcs[k].second);
      adj[s].push_back({t, arc_flow[k]});
      adj[t].push_back({s, arc_flow[k]});
    }
    std::vector<long> stack{0};
    parent_.assign(N_, -1);
    depth_.assign(N_, 0);
    flow_.assign(N_, 0.0);
    std::vector<char> seen(N_, 0);
    seen[0] = 1;
    while (!stack.empty()) {
      const long u = stack.back();
      stack.pop_back();
      for (const auto& [w, f] : adj[u]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = u;
        depth_[w] = depth_[u] + 1;
        flow_[w] = f;
        stack.push_back(w);
      }
    }
  }

  void compute_duals() {
    // pot along the tree: phi_i + psi_j = c_ij on basic arcs
    std::vector<std::vector<long>> children(N_);
    for (std::size_t c = 1; c < N_; ++c)
      if (parent_[c] >= 0) children[parent_[c]].push_back(static_cast<long>(c));
    pot_[0] = 0.0;
    std::vector<long> stack{0};
    while (!stack.empty()) {
      const long u = stack.back();
      stack.pop_back();
      for (long c : children[u]) {
        const auto [i, j] = arc_of(static_cast<std::size_t>(c));
        pot_[c] = cost_[i * n2_ + j] - pot_[u];
        stack.push_back(c);
      }
    }
  }

  // Returns true if the pivot moved a positive amount of flow.
  bool pivot(std::size_t arc) {
    const long ei = static_cast<long>(arc / n2_);
    const long ej = static_cast<long>(n1_ + arc % n2_);

    // path arcs as (child, sign): sign is the flow change direction when one
    // unit is pushed around the cycle entering at ei -> ej
    std::vector<std::pair<long, int>> path;
    long a = ei;
    long b = ej;
    // from the source side, the cycle traverses parent->child, so a child
    // that is a sink sees +1; from the sink side it is child->parent, -1 for
    // sink children
    while (depth_[a] > depth_[b]) {
      path.push_back({a, a < static_cast<long>(n1_) ? -1 : +1});
      a = parent_[a];
    }
    while (depth_[b] > depth_[a]) {
      path.push_back({b, b < static_cast<long>(n1_) ? +1 : -1});
      b = parent_[b];
    }
    while (a != b) {
      path.push_back({a, a < static_cast<long>(n1_) ? -1 : +1});
      a = parent_[a];
      path.push_back({b, b < static_cast<long>(n1_) ? +1 : -1});
      b = parent_[b];
    }

    double theta = std::numeric_limits<double>::infinity();
    long leave = -1;
    for (const auto& [c, s] : path) {
      if (s < 0 && flow_[c] < theta) {
        theta = flow_[c];
        leave = c;
      }
    }
    if (leave < 0) throw SolverError("transport simplex: unbounded pivot");

    for (const auto& [c, s] : path) flow_[c] += s * theta;

    // collect the new basis: all (child,parent) arcs minus the leaving one,
    // plus the entering arc
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    std::vector<double> fl;
    arcs.reserve(N_);
    fl.reserve(N_);
    for (std::size_t c = 1; c < N_; ++c) {
      if (parent_[c] < 0 || static_cast<long>(c) == leave) continue;
      arcs.push_back(arc_of(c));
      fl.push_back(flow_[c]);
    }
    arcs.emplace_back(static_cast<std::size_t>(ei), static_cast<std::size_t>(ej) - n1_);
    fl.push_back(theta);
    rebuild_tree(arcs, fl);
    return theta > 0.0;
  }
};

}  // namespace

std::pair<TransportPlan, DualPair> solve_discrete(const DiscreteMeasure& mu1_in,
                                                  const DiscreteMeasure& mu2_in,
                                                  const DiscreteSolveOptions& opts) {
  if (mu1_in.dim != mu2_in.dim) throw std::invalid_argument("dimension mismatch");
  const DiscreteMeasure mu1 = mu1_in.merged_duplicates();
  const DiscreteMeasure mu2 = mu2_in.merged_duplicates();
  if (mu1.size() * mu2.size() > opts.max_entries) throw SolverError("instance too large");
  if (opts.min_weight > 0.0) {
    for (double w : mu1.weights)
      if (w < opts.min_weight) throw SolverError("degenerate weights");
    for (double w : mu2.weights)
      if (w < opts.min_weight) throw SolverError("degenerate weights");
  }
  TransportSimplex simplex(mu1, mu2);
  simplex.run();
  return simplex.extract();
}

std::vector<double> discrete_c_transform(std::span<const double> phi,
                                         std::span<const double> points1,
                                         std::span<const double> points2, int dim) {
  const std::size_t m1 = phi.size();
  if (points1.size() != m1 * static_cast<std::size_t>(dim))
    throw std::invalid_argument("discrete_c_transform: shape mismatch");
  const std::size_t m2 = points2.size() / static_cast<std::size_t>(dim);
  std::vector<double> psi(m2);
  for (std::size_t j = 0; j < m2; ++j) {
    const double* y = points2.data() + j * dim;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m1; ++i) {
      const double v = pair_cost(points1.data() + i * dim, y, dim) - phi[i];
      if (v < best) best = v;
    }
    psi[j] = best;
  }
  return psi;
}

double oracle_assignment(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  const std::size_t m = mu1.size();
  if (m != mu2.size() || m > 8) throw std::invalid_argument("oracle size exceeded");
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(mu1.weights[i] - 1.0 / static_cast<double>(m)) > 1e-12 ||
        std::abs(mu2.weights[i] - 1.0 / static_cast<double>(m)) > 1e-12)
      throw std::invalid_argument("oracle size exceeded");  // uniform weights only
  }
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      c += pair_cost(mu1.point(i), mu2.point(perm[i]), mu1.dim) / static_cast<double>(m);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace wbary
