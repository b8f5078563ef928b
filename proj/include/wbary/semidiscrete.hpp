#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wbary/measures.hpp"

namespace wbary {

// Dual potential on the atoms of a discrete measure.
struct PotentialVector {
  std::vector<double> values;
};

// c-transform of a PotentialVector sampled at grid cell centers, with the
// attaining (Laguerre cell) atom index per node.
struct GridPotential {
  RegularGrid grid;
  std::vector<double> values;            // M
  std::vector<std::uint32_t> assignment;  // M
};

struct SolverOptions {
  double tol_grad = 1e-6;     // max-norm of u - cell_masses
  int max_iters = 500;
  double initial_step = 1.0;
  double min_step = 1e-12;
  double max_step = 1e6;
  double armijo = 1e-4;
  bool momentum = false;      // heavy-ball term on accepted steps
  double momentum_beta = 0.5;
  // stop once the dual gain over stall_window accepted steps drops below
  // stall_rtol * (1 + |I|); the gradient max-norm cannot fall below the
  // node-mass quantization of the grid, so tol_grad alone may never trigger
  int stall_window = 16;
  double stall_rtol = 1e-9;
  // on a backtracking failure, fall back to diminishing subgradient steps
  // instead of exiting with no-progress (the discretized dual is piecewise
  // linear and line search alone jams at non-optimal vertices)
  bool explore = true;
};

enum class SolveStatus {
  Converged,   // grad_norm <= tol_grad
  MaxIters,    // iteration budget exhausted
  NoProgress,  // backtracking found no ascent step above min_step
  Stalled,     // dual value stopped improving (quadrature floor)
};

std::string to_string(SolveStatus s);

struct SemiDiscreteSolution {
  PotentialVector phi;        // normalized: grid min of the c-transform is 0
  GridPotential c_transform;
  double dual_value = 0.0;    // I(phi) = W2^2(mu_hat, nu) / 2 at the optimum
  std::vector<double> cell_masses;
  int iterations = 0;
  double grad_norm = 0.0;     // max_i |u_i - cell_masses_i| at exit
  SolveStatus status = SolveStatus::Converged;
};

// phi^c(y_j) = min_i (|y_j - x_i|^2/2 - phi_i) at every cell center, ties to
// the lowest atom index.
GridPotential c_transform(const PotentialVector& phi, const DiscreteMeasure& atoms,
                          const RegularGrid& grid);

// nu-mass of each Laguerre cell under midpoint quadrature.
std::vector<double> laguerre_masses(const GridPotential& ct, const GridDensity& nu);

// I(phi) = sum_i u_i phi_i + sum_j Delta rho_j phi^c(y_j)
double dual_objective(const PotentialVector& phi, const DiscreteMeasure& mu_hat,
                      const GridDensity& nu);

// Maximizes I by gradient ascent with backtracking (optionally heavy-ball).
// Duplicated atoms are merged before solving; the solution is reported on the
// merged atoms.
SemiDiscreteSolution solve_semidiscrete(
    const DiscreteMeasure& mu_hat, const GridDensity& nu, const SolverOptions& opts = {},
    const std::optional<PotentialVector>& warm_start = std::nullopt);

// 2 * dual_value, the W2^2 estimate.
double transport_cost_estimate(const SemiDiscreteSolution& sol);

}  // namespace wbary
