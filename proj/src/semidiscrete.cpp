#include "wbary/semidiscrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wbary/errors.hpp"
#include "wbary/kernels.hpp"

namespace wbary {

namespace {

// Axis-separated copies of atoms and nodes feeding the sweep kernels, plus
// the node term sum_j node_mass_j * |y_j|^2/2 that is constant in phi.
struct SweepWorkspace {
  std::vector<std::vector<double>> atom_axes;
  std::vector<std::vector<double>> node_axes;
  std::vector<double> node_half_sqnorm;
  kernels::AtomsView atoms{};
  kernels::NodesView nodes{};

  SweepWorkspace(const DiscreteMeasure& mu, const RegularGrid& grid) {
    const int d = mu.dim;
    if (grid.dim() != d) throw std::invalid_argument("dimension mismatch");
    const std::size_t m = mu.size();
    atom_axes.assign(d, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (int a = 0; a < d; ++a) atom_axes[a][i] = mu.point(i)[a];
    node_axes = grid.node_table();
    const std::size_t M = grid.size();
    node_half_sqnorm.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += node_axes[a][j] * node_axes[a][j];
      node_half_sqnorm[j] = 0.5 * s;
    }
    atoms.dim = d;
    atoms.count = m;
    nodes.dim = d;
    nodes.count = M;
    for (int a = 0; a < d; ++a) {
      atoms.xs[a] = atom_axes[a].data();
      nodes.ys[a] = node_axes[a].data();
    }
  }
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max-iters";
    case SolveStatus::NoProgress: return "no-progress";
    case SolveStatus::Stalled: return "stalled";
  }
  return "?";
}

GridPotential c_transform(const PotentialVector& phi, const DiscreteMeasure& atoms,
                          const RegularGrid& grid) {
  if (phi.values.size() != atoms.size())
    throw std::invalid_argument("c_transform: potential size != atom count");
  SweepWorkspace ws(atoms, grid);
  std::vector<double> shifted;
  kernels::shifted_offsets(ws.atoms, phi.values, shifted);
  GridPotential out;
  out.grid = grid;
  out.values.resize(grid.size());
  out.assignment.resize(grid.size());
  kernels::ctransform_minvals(ws.atoms, shifted, ws.nodes, out.values);
  kernels::ctransform_argmin(ws.atoms, shifted, ws.nodes, out.values, out.assignment);
  for (std::size_t j = 0; j < out.values.size(); ++j)
    out.values[j] += ws.node_half_sqnorm[j];
  return out;
}

std::vector<double> laguerre_masses(const GridPotential& ct, const GridDensity& nu) {
  if (!ct.grid.same_layout(nu.grid))
    throw std::invalid_argument("laguerre_masses: grid mismatch");
  const std::vector<double> node_mass = nu.cell_masses();
  std::uint32_t m = 0;
  for (std::uint32_t a : ct.assignment) m = std::max(m, a);
  std::vector<double> masses;
  kernels::cell_masses(ct.assignment, node_mass, static_cast<std::size_t>(m) + 1, masses);
  return masses;
}

double dual_objective(const PotentialVector& phi, const DiscreteMeasure& mu_hat,
                      const GridDensity& nu) {
  const GridPotential ct = c_transform(phi, mu_hat, nu.grid);
  const std::vector<double> node_mass = nu.cell_masses();
  double s = kernels::weighted_sum(node_mass, ct.values);
  for (std::size_t i = 0; i < mu_hat.size(); ++i) s += mu_hat.weights[i] * phi.values[i];
  return s;
}

SemiDiscreteSolution solve_semidiscrete(const DiscreteMeasure& mu_in, const GridDensity& nu,
                                        const SolverOptions& opts,
                                        const std::optional<PotentialVector>& warm_start) {
  const DiscreteMeasure mu = mu_in.merged_duplicates();
  const std::size_t m = mu.size();
  const std::size_t M = nu.size();

  SweepWorkspace ws(mu, nu.grid);
  const std::vector<double> node_mass = nu.cell_masses();
  const double node_term = kernels::weighted_sum(node_mass, ws.node_half_sqnorm);

  std::vector<double> phi(m, 0.0);
  if (warm_start && warm_start->values.size() == m) phi = warm_start->values;

  std::vector<double> shifted, trial_shifted;
  std::vector<double> raw(M), trial_raw(M);
  std::vector<std::uint32_t> assignment(M);
  std::vector<double> masses, grad(m), phi_prev(m, 0.0), phi_try(m);
  bool have_prev = false;

  // objective from a raw min-value sweep: I = node_term + <mass, raw> + <u, p>
  auto objective_from = [&](const std::vector<double>& p, const std::vector<double>& rawv) {
    double s = node_term + kernels::weighted_sum(node_mass, rawv);
    for (std::size_t i = 0; i < m; ++i) s += mu.weights[i] * p[i];
    return s;
  };

  kernels::shifted_offsets(ws.atoms, phi, shifted);
  kernels::ctransform_minvals(ws.atoms, shifted, ws.nodes, raw);
  kernels::ctransform_argmin(ws.atoms, shifted, ws.nodes, raw, assignment);
  kernels::cell_masses(assignment, node_mass, m, masses);
  double obj = objective_from(phi, raw);

  // best (accepted) iterate; the dual value is non-decreasing along it
  std::vector<double> best_phi = phi;
  double best_obj = obj;

  double step = opts.initial_step;
  SolveStatus status = SolveStatus::MaxIters;
  int iters = 0;
  double window_ref = best_obj;

  // The discretized dual is piecewise linear, so backtracking along the
  // gradient can jam at a vertex that is not the maximum. When that happens
  // the solver switches to diminishing subgradient steps (no acceptance
  // test) until a better point turns up, then resumes line-search ascent
  // from there.
  bool exploring = false;
  int explore_t = 0;
  double explore_step = 0.0;

  auto refresh_current = [&]() {
    kernels::shifted_offsets(ws.atoms, phi, shifted);
    kernels::ctransform_minvals(ws.atoms, shifted, ws.nodes, raw);
    kernels::ctransform_argmin(ws.atoms, shifted, ws.nodes, raw, assignment);
    kernels::cell_masses(assignment, node_mass, m, masses);
    obj = objective_from(phi, raw);
  };

  for (int it = 0; it < opts.max_iters; ++it) {
    double grad_norm = 0.0;
    double gsq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      grad[i] = mu.weights[i] - masses[i];
      grad_norm = std::max(grad_norm, std::abs(grad[i]));
      gsq += grad[i] * grad[i];
    }
    if (!exploring && grad_norm <= opts.tol_grad) {
      status = SolveStatus::Converged;
      if (obj >= best_obj) {
        best_obj = obj;
        best_phi = phi;
      }
      break;
    }
    if (opts.stall_window > 0 && it > 0 && it % opts.stall_window == 0) {
      if (best_obj - window_ref <= opts.stall_rtol * (1.0 + std::abs(best_obj))) {
        status = SolveStatus::Stalled;
        break;
      }
      window_ref = best_obj;
    }

    if (!exploring) {
      double trial = step;
      bool accepted = false;
      for (int ls = 0; ls < 30 && trial >= opts.min_step; ++ls) {
        for (std::size_t i = 0; i < m; ++i) {
          phi_try[i] = phi[i] + trial * grad[i];
          if (opts.momentum && have_prev)
            phi_try[i] += opts.momentum_beta * (phi[i] - phi_prev[i]);
        }
        kernels::shifted_offsets(ws.atoms, phi_try, trial_shifted);
        kernels::ctransform_minvals(ws.atoms, trial_shifted, ws.nodes, trial_raw);
        const double obj_try = objective_from(phi_try, trial_raw);
        if (obj_try >= obj + opts.armijo * trial * gsq) {
          accepted = true;
          obj = obj_try;
          break;
        }
        trial *= 0.5;
      }
      if (accepted) {
        phi_prev.swap(phi);
        phi = phi_try;
        have_prev = true;
        shifted.swap(trial_shifted);
        raw.swap(trial_raw);
        step = std::min(trial * 2.0, opts.max_step);
        ++iters;
        kernels::ctransform_argmin(ws.atoms, shifted, ws.nodes, raw, assignment);
        kernels::cell_masses(assignment, node_mass, m, masses);
        if (obj > best_obj) {
          best_obj = obj;
          best_phi = phi;
        }
        continue;
      }
      if (!opts.explore) {
        status = SolveStatus::NoProgress;
        break;
      }
      exploring = true;
      explore_t = 0;
      explore_step = step;
    }

    // subgradient exploration step
    ++explore_t;
    const double s = explore_step / std::sqrt(static_cast<double>(explore_t));
    for (std::size_t i = 0; i < m; ++i) phi[i] += s * grad[i];
    have_prev = false;
    refresh_current();
    ++iters;
    if (obj > best_obj) {
      best_obj = obj;
      best_phi = phi;
      exploring = false;
      step = std::max(s, opts.min_step * 16.0);
    }
  }

  // report the best iterate seen
  if (phi != best_phi) {
    phi = best_phi;
    refresh_current();
  }

  double grad_norm = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    grad_norm = std::max(grad_norm, std::abs(mu.weights[i] - masses[i]));

  // full grid values, then shift so their minimum is 0
  std::vector<double> values(M);
  for (std::size_t j = 0; j < M; ++j) values[j] = raw[j] + ws.node_half_sqnorm[j];
  double vmin = std::numeric_limits<double>::infinity();
  for (double v : values) vmin = std::min(vmin, v);
  for (double& p : phi) p += vmin;
  for (double& v : values) v -= vmin;

  SemiDiscreteSolution sol;
  sol.phi.values = std::move(phi);
  sol.c_transform.grid = nu.grid;
  sol.c_transform.values = std::move(values);
  sol.c_transform.assignment = std::move(assignment);
  sol.cell_masses = std::move(masses);
  sol.iterations = iters;
  sol.grad_norm = grad_norm;
  sol.status = status;
  sol.dual_value = kernels::weighted_sum(node_mass, sol.c_transform.values);
  for (std::size_t i = 0; i < m; ++i)
    sol.dual_value += mu.weights[i] * sol.phi.values[i];
  return sol;
}

double transport_cost_estimate(const SemiDiscreteSolution& sol) {
  return 2.0 * sol.dual_value;
}

}  // namespace wbary
