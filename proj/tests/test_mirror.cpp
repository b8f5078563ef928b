#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "wbary/errors.hpp"
#include "wbary/mirror.hpp"

using namespace wbary;

namespace {

// iterate's own cell-center discretization
DiscreteMeasure self_discretization(const GridDensity& rho) {
  const auto grid = rho.grid;
  std::vector<double> pts(grid.size() * 2);
  double pt[3];
  for (std::size_t j = 0; j < grid.size(); ++j) {
    grid.node_center(j, pt);
    pts[2 * j] = pt[0];
    pts[2 * j + 1] = pt[1];
  }
  std::vector<double> w = rho.cell_masses();
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return DiscreteMeasure(2, std::move(pts), std::move(w));
}

}  // namespace

TEST_CASE("schedule values") {
  Schedule s;
  s.kind = ScheduleKind::InverseSqrtK;
  s.c = 2.0;
  CHECK(s.eta(0) == doctest::Approx(2.0));
  CHECK(s.eta(3) == doctest::Approx(1.0));

  s.kind = ScheduleKind::ConstantOverSqrtT;
  s.T = 16;
  CHECK(s.eta(0) == doctest::Approx(0.5));
  CHECK(s.eta(9) == doctest::Approx(0.5));

  s.kind = ScheduleKind::Power;
  s.c = 0.1;
  s.alpha = 0.3;
  CHECK(s.eta(0) == doctest::Approx(0.1));
  CHECK(s.eta(7) == doctest::Approx(0.1 * std::pow(8.0, -0.3)));
}

TEST_CASE("averaged potential combinations") {
  const auto grid = testsupport::unit_grid_2d(4);
  GridPotential a, b;
  a.grid = grid;
  b.grid = grid;
  a.values.assign(grid.size(), 0.0);
  b.values.assign(grid.size(), 4.0);

  const auto only = averaged_potential({a}, {1.0});
  for (double v : only) CHECK(v == 0.0);

  const auto equal = averaged_potential({b, b}, {0.25, 0.75});
  for (double v : equal) CHECK(v == doctest::Approx(4.0));

  const auto mix = averaged_potential({a, b}, {0.25, 0.75});
  for (double v : mix) CHECK(v == doctest::Approx(3.0));

  GridPotential other;
  other.grid = testsupport::unit_grid_2d(5);
  other.values.assign(other.grid.size(), 1.0);
  CHECK_THROWS_WITH_AS(averaged_potential({a, other}, {0.5, 0.5}), "grid mismatch",
                       std::invalid_argument);
}

TEST_CASE("mirror step: constants cancel, eta=0 is the identity") {
  const auto grid = testsupport::unit_grid_2d(4);
  const GridDensity rho = testsupport::random_density(grid, 8);

  const std::vector<double> constant(grid.size(), 2.5);
  auto [next, kl] = mirror_step(rho, constant, 0.7);
  for (std::size_t j = 0; j < rho.size(); ++j)
    CHECK(next.log_values[j] == doctest::Approx(rho.log_values[j]).epsilon(1e-12));
  CHECK(kl == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> arbitrary(grid.size());
  CounterRng rng(3, 1);
  for (double& v : arbitrary) v = rng.uniform();
  auto [same, kl0] = mirror_step(rho, arbitrary, 0.0);
  for (std::size_t j = 0; j < rho.size(); ++j)
    CHECK(same.log_values[j] == rho.log_values[j]);
  CHECK(kl0 == 0.0);
}

TEST_CASE("mirror step two-cell arithmetic") {
  // uniform density on two cells of volume 1/2, potential (0, ln 4), eta = 1
  RegularGrid grid(BoxDomain(2, {0, 0, 0}, {1, 1, 0}), {2, 1, 1});
  const GridDensity rho = GridDensity::uniform(grid);
  const std::vector<double> phi{0.0, std::log(4.0)};
  auto [next, kl] = mirror_step(rho, phi, 1.0);

  // masses become proportional to (1, 1/4): densities (1.6, 0.4)
  CHECK(std::exp(next.log_values[0]) == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(std::exp(next.log_values[1]) == doctest::Approx(0.4).epsilon(1e-12));

  const double expected_kl =
      0.5 * (1.0 * (std::log(1.0) - std::log(1.6)) + 1.0 * (std::log(1.0) - std::log(0.4)));
  CHECK(kl == doctest::Approx(expected_kl).epsilon(1e-12));

  std::vector<double> bad{std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK_THROWS_AS(mirror_step(rho, bad, 1.0), SolverError);
}

TEST_CASE("fixed point: inputs equal to the iterate's own discretization") {
  const auto grid = testsupport::unit_grid_2d(16);
  const GridDensity rho0 = GridDensity::uniform(grid);
  const DiscreteMeasure self = self_discretization(rho0);

  std::vector<InputMeasure> inputs;
  inputs.push_back({self, 0.5});
  inputs.push_back({self, 0.5});

  Schedule sched;
  sched.kind = ScheduleKind::InverseSqrtK;
  sched.T = 1;
  RunOptions opts;
  opts.strict = true;
  const BarycenterResult res = run_barycenter(inputs, grid, sched, opts);

  const double delta = grid.cell_volume();
  CHECK(res.trace.rows[0].objective <= 2.0 * delta * 2.0);

  // after one step the density is unchanged to 1e-6 in the sup norm
  Schedule one;
  one.T = 0;
  RunOptions keep;
  keep.store_best = false;
  const BarycenterResult stepped = run_barycenter(inputs, grid, one, keep);
  double max_diff = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    max_diff = std::max(max_diff,
                        std::abs(stepped.density.log_values[j] - rho0.log_values[j]));
  CHECK(max_diff <= 1e-6);
}

TEST_CASE("single-atom input: objective decreases monotonically") {
  const auto grid = testsupport::unit_grid_2d(16);
  std::vector<InputMeasure> inputs;
  inputs.push_back({DiscreteMeasure(2, {0.3, 0.6}, {1.0}), 1.0});

  Schedule sched;
  sched.kind = ScheduleKind::Power;
  sched.c = 0.5;
  sched.alpha = 0.3;
  sched.T = 8;
  RunOptions opts;
  opts.strict = true;
  const BarycenterResult res = run_barycenter(inputs, grid, sched, opts);
  REQUIRE(res.trace.rows.size() == 9);
  for (std::size_t k = 0; k + 1 < res.trace.rows.size(); ++k)
    CHECK(res.trace.rows[k + 1].objective < res.trace.rows[k].objective + 1e-12);
  CHECK(res.best_k == 8);
}

TEST_CASE("per-iteration invariants hold under strict mode") {
  const auto grid = testsupport::box_grid_2d(-1.0, 1.0, 16);
  const double R = grid.domain.radius();
  std::vector<InputMeasure> inputs;
  inputs.push_back({testsupport::random_cloud(40, 2, 3, -0.7, 0.7), 0.5});
  inputs.push_back({testsupport::random_cloud(40, 2, 4, -0.7, 0.7), 0.5});

  Schedule sched;
  sched.kind = ScheduleKind::InverseSqrtK;
  sched.T = 12;
  RunOptions opts;
  opts.strict = true;  // any invariant violation throws
  const BarycenterResult res = run_barycenter(inputs, grid, sched, opts);
  for (const auto& row : res.trace.rows) {
    CHECK(row.kl_step <= 2.0 * row.eta * row.eta * R * R * R * R + 1e-7);
    CHECK(row.max_potential <= 2.0 * R * R + 1e-7);
    CHECK(row.max_potential >= -1e-9);
  }
}

TEST_CASE("histogram route runs and stays bounded") {
  const auto grid = testsupport::unit_grid_2d(6);
  CounterRng rng(5, 2);
  std::vector<double> w1(grid.size()), w2(grid.size());
  for (auto& x : w1) x = rng.uniform();
  for (auto& x : w2) x = rng.uniform();
  std::vector<InputMeasure> inputs;
  inputs.push_back({GridHistogram(grid, w1), 0.5});
  inputs.push_back({GridHistogram(grid, w2), 0.5});

  Schedule sched;
  sched.kind = ScheduleKind::InverseSqrtK;
  sched.c = 0.5;
  sched.T = 6;
  RunOptions opts;
  opts.strict = true;
  const BarycenterResult res = run_barycenter(inputs, grid, sched, opts);
  CHECK(res.trace.rows.size() == 7);
  for (const auto& row : res.trace.rows) {
    CHECK(std::isfinite(row.objective));
    CHECK(row.inner_residuals.size() == 2);
    CHECK(row.inner_residuals[0] <= 1e-8);
  }
  CHECK(res.best_objective <= res.trace.rows[0].objective);
}

TEST_CASE("density inputs route through the discrete branch") {
  const auto grid = testsupport::unit_grid_2d(6);
  std::vector<InputMeasure> inputs;
  inputs.push_back({testsupport::random_density(grid, 31), 0.6});
  // a density on a coarser grid gets resampled
  inputs.push_back({testsupport::random_density(testsupport::unit_grid_2d(3), 32), 0.4});

  Schedule sched;
  sched.T = 2;
  const BarycenterResult res = run_barycenter(inputs, grid, sched);
  CHECK(res.trace.rows.size() == 3);
  CHECK(std::isfinite(res.best_objective));
}

TEST_CASE("objective estimate: self discretization, single atom, reflection symmetry") {
  const auto grid = testsupport::unit_grid_2d(12);
  const GridDensity rho = testsupport::random_density(grid, 17);

  std::vector<InputMeasure> self_in;
  self_in.push_back({self_discretization(rho), 1.0});
  CHECK(objective_estimate(rho, self_in) <= 2.0 * grid.cell_volume() * 2.0);

  // single atom: 1/2 second moment of rho about the atom, by direct grid sum
  const double ax = 0.3125, ay = 0.5625;
  std::vector<InputMeasure> atom_in;
  atom_in.push_back({DiscreteMeasure(2, {ax, ay}, {1.0}), 1.0});
  const double est = objective_estimate(rho, atom_in);
  double direct = 0.0;
  const auto node_mass = rho.cell_masses();
  double pt[3];
  for (std::size_t j = 0; j < grid.size(); ++j) {
    rho.grid.node_center(j, pt);
    direct += node_mass[j] * 0.5 * ((pt[0] - ax) * (pt[0] - ax) + (pt[1] - ay) * (pt[1] - ay));
  }
  CHECK(est == doctest::Approx(direct).epsilon(1e-10));

  // reflecting both the density and the input (about axis 1) leaves the
  // objective unchanged
  const std::size_t n = 12;
  std::vector<double> reflected(rho.log_values.size());
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2)
      reflected[i1 * n + (n - 1 - i2)] = rho.log_values[i1 * n + i2];
  const GridDensity rho_r(grid, reflected);
  std::vector<InputMeasure> atom_r;
  atom_r.push_back({DiscreteMeasure(2, {ax, 1.0 - ay}, {1.0}), 1.0});
  CHECK(objective_estimate(rho_r, atom_r) == doctest::Approx(est).epsilon(1e-10));
}

TEST_CASE("gaussian inputs are discretized deterministically") {
  const GaussianMeasure g({0.5, 0.5}, {0.01, 0.0, 0.0, 0.02});
  const DiscreteMeasure a = sample_gaussian_atoms(g, 64, 7, 0);
  const DiscreteMeasure b = sample_gaussian_atoms(g, 64, 7, 0);
  for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k] == b.points[k]);
  const DiscreteMeasure c = sample_gaussian_atoms(g, 64, 7, 1);
  bool all_same = true;
  for (std::size_t k = 0; k < a.points.size(); ++k)
    all_same = all_same && a.points[k] == c.points[k];
  CHECK(!all_same);

  const auto grid = testsupport::unit_grid_2d(8);
  std::vector<InputMeasure> inputs;
  inputs.push_back({g, 1.0});
  Schedule sched;
  sched.T = 2;
  RunOptions opts;
  opts.gaussian_atoms = 64;
  const BarycenterResult r1 = run_barycenter(inputs, grid, sched, opts);
  const BarycenterResult r2 = run_barycenter(inputs, grid, sched, opts);
  for (std::size_t k = 0; k < r1.trace.rows.size(); ++k)
    CHECK(r1.trace.rows[k].objective == r2.trace.rows[k].objective);
}

TEST_CASE("trace sink receives every row") {
  const auto grid = testsupport::unit_grid_2d(6);
  std::vector<InputMeasure> inputs;
  inputs.push_back({DiscreteMeasure(2, {0.5, 0.5}, {1.0}), 1.0});
  Schedule sched;
  sched.T = 4;
  RunOptions opts;
  int calls = 0;
  opts.trace_sink = [&](const TraceRow& row) {
    CHECK(row.k == calls);
    ++calls;
  };
  run_barycenter(inputs, grid, sched, opts);
  CHECK(calls == 5);
}
