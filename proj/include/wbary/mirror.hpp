#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wbary/discrete_ot.hpp"
#include "wbary/measures.hpp"
#include "wbary/semidiscrete.hpp"

namespace wbary {

enum class ScheduleKind {
  ConstantOverSqrtT,  // eta_k = c / sqrt(T)
  InverseSqrtK,       // eta_k = c / sqrt(k+1)
  Power,              // eta_k = c * (k+1)^(-alpha)
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::InverseSqrtK;
  double c = 1.0;
  double alpha = 0.5;
  int T = 100;

  double eta(int k) const;
};

struct TraceRow {
  int k = 0;
  double eta = 0.0;
  double objective = 0.0;  // NaN when not evaluated at this iteration
  double kl_step = 0.0;
  double max_potential = 0.0;
  std::vector<double> inner_residuals;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
};

struct BarycenterResult {
  GridDensity density;  // best iterate when store_best, else the final one
  RunTrace trace;
  int best_k = 0;
  double best_objective = 0.0;
};

struct RunOptions {
  SolverOptions inner;
  // warm-started inner solves (k > 0) get a tighter iteration budget; 0 means
  // inner.max_iters applies everywhere
  int warm_max_iters = 60;
  DiscreteSolveOptions discrete{.max_entries = 4'000'000, .min_weight = 0.0};
  std::uint64_t seed = 0;
  std::size_t gaussian_atoms = 2000;  // sample count when a Gaussian input is discretized
  int eval_stride = 1;
  bool strict = false;      // abort (vs warn) on per-iteration invariant violations
  bool store_best = true;
  bool warm_start = true;
  std::optional<GridDensity> init_density;  // default: uniform on the grid
  std::function<void(const TraceRow&)> trace_sink;
};

// Pointwise weighted sum of grid potentials sharing one grid.
std::vector<double> averaged_potential(const std::vector<GridPotential>& potentials,
                                       const std::vector<double>& weights);
std::vector<double> averaged_potential_values(const std::vector<std::vector<double>>& potentials,
                                              const std::vector<double>& weights);

// log rho' = log rho - eta * phi_bar, then renormalize. Returns the new
// density and the KL divergence D(rho || rho').
std::pair<GridDensity, double> mirror_step(const GridDensity& rho,
                                           const std::vector<double>& phi_bar, double eta);

// Outer mirror-descent loop: per input, the matching transport subsolver
// produces a Kantorovich potential on the grid; the averaged potential drives
// the multiplicative density update.
BarycenterResult run_barycenter(const std::vector<InputMeasure>& inputs,
                                const RegularGrid& grid, const Schedule& schedule,
                                const RunOptions& opts = {});

// E(rho) = sum_i w_i W2^2(mu_i, rho) / 2 via fresh subsolver calls. Gaussian
// inputs are sampled to atoms unless gaussian_closed_form is set, in which
// case the Bures cost against a moment-matched Gaussian is used.
double objective_estimate(const GridDensity& rho, const std::vector<InputMeasure>& inputs,
                          const RunOptions& opts = {}, bool gaussian_closed_form = false);

// Piecewise-constant resampling of a density onto another grid.
GridHistogram resample_to_grid(const GridDensity& src, const RegularGrid& dst);

// Seeded i.i.d. discretization of a Gaussian input; the input index selects
// the rng substream.
DiscreteMeasure sample_gaussian_atoms(const GaussianMeasure& g, std::size_t m,
                                      std::uint64_t seed, std::size_t input_index);

}  // namespace wbary
