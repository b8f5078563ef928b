#include "wbary/mirror.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "wbary/errors.hpp"
#include "wbary/gaussian.hpp"
#include "wbary/sampling.hpp"

namespace wbary {

double Schedule::eta(int k) const {
  switch (kind) {
    case ScheduleKind::ConstantOverSqrtT:
      return c / std::sqrt(static_cast<double>(std::max(T, 1)));
    case ScheduleKind::InverseSqrtK:
      return c / std::sqrt(static_cast<double>(k + 1));
    case ScheduleKind::Power:
      return c * std::pow(static_cast<double>(k + 1), -alpha);
  }
  return c;
}

std::vector<double> averaged_potential_values(const std::vector<std::vector<double>>& potentials,
                                              const std::vector<double>& weights) {
  if (potentials.empty() || potentials.size() != weights.size())
    throw std::invalid_argument("averaged_potential: size mismatch");
  const std::size_t M = potentials[0].size();
  std::vector<double> out(M, 0.0);
  for (std::size_t i = 0; i < potentials.size(); ++i) {
    if (potentials[i].size() != M) throw std::invalid_argument("grid mismatch");
    const double w = weights[i];
    for (std::size_t j = 0; j < M; ++j) out[j] += w * potentials[i][j];
  }
  return out;
}

std::vector<double> averaged_potential(const std::vector<GridPotential>& potentials,
                                       const std::vector<double>& weights) {
  if (potentials.empty() || potentials.size() != weights.size())
    throw std::invalid_argument("averaged_potential: size mismatch");
  for (std::size_t i = 1; i < potentials.size(); ++i)
    if (!potentials[i].grid.same_layout(potentials[0].grid))
      throw std::invalid_argument("grid mismatch");
  std::vector<std::vector<double>> vals;
  vals.reserve(potentials.size());
  for (const auto& p : potentials) vals.push_back(p.values);
  return averaged_potential_values(vals, weights);
}

std::pair<GridDensity, double> mirror_step(const GridDensity& rho,
                                           const std::vector<double>& phi_bar, double eta) {
  if (phi_bar.size() != rho.size()) throw std::invalid_argument("mirror_step: size mismatch");
  if (!(eta >= 0.0)) throw std::invalid_argument("mirror_step: eta must be nonnegative");
  const std::size_t M = rho.size();
  std::vector<double> next(M);
  for (std::size_t j = 0; j < M; ++j) {
    next[j] = rho.log_values[j] - eta * phi_bar[j];
    if (!std::isfinite(next[j]))
      throw SolverError("mirror_step: non-finite log-density update");
  }
  GridDensity out(rho.grid, std::move(next));
  const double delta = rho.grid.cell_volume();
  double kl = 0.0;
  for (std::size_t j = 0; j < M; ++j)
    kl += std::exp(rho.log_values[j]) * (rho.log_values[j] - out.log_values[j]);
  kl *= delta;
  return {std::move(out), kl};
}

GridHistogram resample_to_grid(const GridDensity& src, const RegularGrid& dst) {
  const std::size_t M = dst.size();
  std::vector<double> w(M, 0.0);
  double pt[3];
  for (std::size_t j = 0; j < M; ++j) {
    dst.node_center(j, pt);
    if (!src.grid.domain.contains(pt)) continue;
    w[j] = std::exp(src.log_values[src.grid.cell_of_point(pt)]);
  }
  return GridHistogram(dst, std::move(w));
}

DiscreteMeasure sample_gaussian_atoms(const GaussianMeasure& g, std::size_t m,
                                      std::uint64_t seed, std::size_t input_index) {
  const int d = g.dim;
  const SpdMatrix cov(d, g.cov);
  const SpdMatrix root = spd_sqrt(cov);
  CounterRng rng(seed, 0x6761747323ULL + input_index);
  std::vector<double> pts(m * static_cast<std::size_t>(d));
  std::vector<double> z(d);
  for (std::size_t s = 0; s < m; ++s) {
    for (int a = 0; a < d; ++a) z[a] = rng.normal();
    for (int a = 0; a < d; ++a) {
      double x = g.mean[a];
      for (int b = 0; b < d; ++b) x += root(a, b) * z[b];
      pts[s * d + a] = x;
    }
  }
  return DiscreteMeasure(d, std::move(pts),
                         std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

namespace {

struct PreparedInput {
  enum class Route { SemiDiscrete, Discrete } route = Route::SemiDiscrete;
  double weight = 0.0;
  DiscreteMeasure atoms;  // point cloud for the semi-discrete route, target atoms otherwise
  std::optional<PotentialVector> warm;
};

std::vector<PreparedInput> prepare_inputs(const std::vector<InputMeasure>& inputs,
                                          const RegularGrid& grid, const RunOptions& opts) {
  validate_input_weights(inputs);
  std::vector<PreparedInput> prepared;
  prepared.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    PreparedInput p;
    p.weight = inputs[i].weight;
    if (const auto* dm = std::get_if<DiscreteMeasure>(&inputs[i].measure)) {
      p.route = PreparedInput::Route::SemiDiscrete;
      p.atoms = *dm;
    } else if (const auto* gh = std::get_if<GridHistogram>(&inputs[i].measure)) {
      p.route = PreparedInput::Route::Discrete;
      p.atoms = gh->as_discrete(1e-15);
    } else if (const auto* gd = std::get_if<GridDensity>(&inputs[i].measure)) {
      p.route = PreparedInput::Route::Discrete;
      if (gd->grid.same_layout(grid)) {
        p.atoms = GridHistogram(gd->grid, gd->cell_masses()).as_discrete(1e-15);
      } else {
        p.atoms = resample_to_grid(*gd, grid).as_discrete(1e-15);
      }
    } else {
      const auto& g = std::get<GaussianMeasure>(inputs[i].measure);
      p.route = PreparedInput::Route::SemiDiscrete;
      p.atoms = sample_gaussian_atoms(g, opts.gaussian_atoms, opts.seed, i);
    }
    p.atoms.validate_inside(grid.domain);
    prepared.push_back(std::move(p));
  }
  return prepared;
}

// Iterate cells as a discrete measure (all cells retained, however small).
DiscreteMeasure iterate_as_atoms(const GridDensity& rho) {
  const int d = rho.grid.dim();
  const std::size_t M = rho.size();
  std::vector<double> pts(M * static_cast<std::size_t>(d));
  double pt[3];
  for (std::size_t j = 0; j < M; ++j) {
    rho.grid.node_center(j, pt);
    for (int a = 0; a < d; ++a) pts[j * d + a] = pt[a];
  }
  std::vector<double> w = rho.cell_masses();
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return DiscreteMeasure(d, std::move(pts), std::move(w));
}

struct PotentialResult {
  std::vector<double> values;  // on the iterate grid, min 0
  double half_w2 = 0.0;        // W2^2(mu_i, rho)/2 estimate
  double residual = 0.0;
};

PotentialResult input_potential(PreparedInput& p, const GridDensity& rho,
                                const RunOptions& opts) {
  PotentialResult out;
  if (p.route == PreparedInput::Route::SemiDiscrete) {
    SolverOptions inner = opts.inner;
    const bool warm = opts.warm_start && p.warm.has_value();
    if (warm && opts.warm_max_iters > 0)
      inner.max_iters = std::min(inner.max_iters, opts.warm_max_iters);
    const SemiDiscreteSolution sol =
        solve_semidiscrete(p.atoms, rho, inner, opts.warm_start ? p.warm : std::nullopt);
    out.values = sol.c_transform.values;
    out.half_w2 = sol.dual_value;
    out.residual = sol.grad_norm;
    if (opts.warm_start) p.warm = sol.phi;
  } else {
    const DiscreteMeasure iterate = iterate_as_atoms(rho);
    DiscreteSolveOptions dopts = opts.discrete;
    dopts.min_weight = 0.0;  // iterate cells may carry arbitrarily small mass
    auto [plan, duals] = solve_discrete(iterate, p.atoms, dopts);
    out.values = std::move(duals.phi);
    out.half_w2 = plan.cost;
    out.residual = std::abs(plan.cost - duals.dual_value) / (1.0 + std::abs(plan.cost));
  }
  return out;
}

}  // namespace

BarycenterResult run_barycenter(const std::vector<InputMeasure>& inputs,
                                const RegularGrid& grid, const Schedule& schedule,
                                const RunOptions& opts) {
  std::vector<PreparedInput> prepared = prepare_inputs(inputs, grid, opts);
  const std::size_t n = prepared.size();
  const double R = grid.domain.radius();
  const double pot_cap = 2.0 * R * R + 1e-7;

  GridDensity rho = opts.init_density ? *opts.init_density : GridDensity::uniform(grid);
  if (!rho.grid.same_layout(grid))
    throw std::invalid_argument("run_barycenter: init density grid mismatch");

  BarycenterResult result;
  result.best_objective = std::numeric_limits<double>::infinity();
  result.best_k = -1;
  double initial_objective = std::numeric_limits<double>::quiet_NaN();

  auto violation = [&](int k, const std::string& what) {
    if (opts.strict) throw InvariantError("iteration " + std::to_string(k) + ": " + what);
    std::fprintf(stderr, "[warn] iteration %d: %s\n", k, what.c_str());
  };

  std::vector<std::vector<double>> potentials(n);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = prepared[i].weight;

  for (int k = 0; k <= schedule.T; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    TraceRow row;
    row.k = k;
    row.eta = schedule.eta(k);
    row.inner_residuals.resize(n);

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      PotentialResult pr = input_potential(prepared[i], rho, opts);
      objective += weights[i] * pr.half_w2;
      row.inner_residuals[i] = pr.residual;
      potentials[i] = std::move(pr.values);
    }

    const std::vector<double> phi_bar = averaged_potential_values(potentials, weights);
    double pmin = phi_bar[0];
    double pmax = phi_bar[0];
    for (double v : phi_bar) {
      pmin = std::min(pmin, v);
      pmax = std::max(pmax, v);
    }
    row.max_potential = pmax;
    if (pmin < -1e-9 || pmax > pot_cap)
      violation(k, "averaged potential outside [0, 2R^2] bounds");

    const bool eval_here = opts.eval_stride <= 1 || k % opts.eval_stride == 0;
    row.objective = eval_here ? objective : std::numeric_limits<double>::quiet_NaN();
    if (eval_here) {
      if (std::isnan(initial_objective)) initial_objective = objective;
      if (objective < result.best_objective) {
        result.best_objective = objective;
        result.best_k = k;
        if (opts.store_best) result.density = rho;
      }
      if (objective > 10.0 * std::max(initial_objective, 1e-300) && objective > 1e-12)
        throw SolverError("run_barycenter: objective diverged at iteration " +
                          std::to_string(k));
    }

    auto [next, kl] = mirror_step(rho, phi_bar, row.eta);
    row.kl_step = kl;
    const double kl_cap = 2.0 * row.eta * row.eta * R * R * R * R + 1e-7;
    if (kl > kl_cap) violation(k, "KL step exceeds 2 eta^2 R^4 bound");
    if (next.normalization_defect() > 1e-10) violation(k, "density normalization defect");
    rho = std::move(next);

    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (opts.trace_sink) opts.trace_sink(row);
    result.trace.rows.push_back(std::move(row));
  }

  if (!opts.store_best || result.best_k < 0) result.density = rho;
  return result;
}

double objective_estimate(const GridDensity& rho, const std::vector<InputMeasure>& inputs,
                          const RunOptions& opts, bool gaussian_closed_form) {
  validate_input_weights(inputs);
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double w = inputs[i].weight;
    if (gaussian_closed_form) {
      if (const auto* g = std::get_if<GaussianMeasure>(&inputs[i].measure)) {
        const Moments m = grid_moments(rho);
        const double bw = bures_wasserstein_distance(*g, GaussianMeasure(m.mean, m.cov));
        total += w * 0.5 * bw * bw;
        continue;
      }
    }
    std::vector<InputMeasure> one{{inputs[i].measure, 1.0}};
    RunOptions sub = opts;
    sub.warm_start = false;
    std::vector<PreparedInput> prep = prepare_inputs(one, rho.grid, sub);
    const PotentialResult pr = input_potential(prep[0], rho, sub);
    total += w * pr.half_w2;
  }
  return total;
}

}  // namespace wbary
