#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "test_support.hpp"
#include "wbary/measures.hpp"

using namespace wbary;

TEST_CASE("lsp closed-form values") {
  // uniform density over M cells normalizes to 1
  const std::size_t M = 8;
  const double delta = 0.125;
  std::vector<double> v(M, std::log(1.0 / (static_cast<double>(M) * delta)));
  CHECK(lsp(v, delta) == doctest::Approx(0.0).epsilon(1e-14));

  CHECK(lsp(std::vector<double>{0.0}, 2.0) == doctest::Approx(std::log(2.0)));
  CHECK(lsp(std::vector<double>{std::log(1.0), std::log(3.0)}, 0.5) ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("lsp rejects empty input and bad delta") {
  CHECK_THROWS_WITH_AS(lsp(std::vector<double>{}, 1.0), "empty grid", std::invalid_argument);
  CHECK_THROWS_AS(lsp(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("lsp shift equivariance and permutation invariance") {
  CounterRng rng(7, 1);
  std::vector<double> v(17);
  for (double& x : v) x = 4.0 * (rng.uniform() - 0.5);
  const double delta = 0.3;
  const double base = lsp(v, delta);
  const double c = 1.7;
  std::vector<double> shifted = v;
  for (double& x : shifted) x += c;
  CHECK(lsp(shifted, delta) == doctest::Approx(base + c).epsilon(1e-13));

  std::vector<double> perm = v;
  std::rotate(perm.begin(), perm.begin() + 5, perm.end());
  std::swap(perm[0], perm[3]);
  CHECK(lsp(perm, delta) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("normalize_log_density is idempotent") {
  const auto grid = testsupport::unit_grid_2d(4);
  GridDensity g = testsupport::random_density(grid, 3);
  const GridDensity h = normalize_log_density(g);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(h.log_values[j] == g.log_values[j]);
}

TEST_CASE("normalize_log_density constant and two-cell cases") {
  // constant vector on M=4 cells with Delta=0.25 is the uniform unit-box density
  RegularGrid grid(BoxDomain(2, {0, 0, 0}, {1, 1, 0}), {2, 2, 1});
  CHECK(grid.cell_volume() == doctest::Approx(0.25));
  GridDensity g(grid, std::vector<double>(4, 3.7));
  for (double x : g.log_values) CHECK(x == doctest::Approx(0.0).epsilon(1e-14));

  // two cells, values (log 3, log 1), Delta = 0.5: sum Delta exp = 2
  RegularGrid line(BoxDomain(2, {0, 0, 0}, {1, 1, 0}), {2, 1, 1});
  CHECK(line.cell_volume() == doctest::Approx(0.5));
  GridDensity d2(line, {std::log(3.0), std::log(1.0)});
  CHECK(d2.log_values[0] == doctest::Approx(std::log(1.5)).epsilon(1e-13));
  CHECK(d2.log_values[1] == doctest::Approx(std::log(0.5)).epsilon(1e-13));
}

TEST_CASE("GridDensity rejects non-finite values and stays normalized") {
  const auto grid = testsupport::unit_grid_2d(3);
  std::vector<double> bad(grid.size(), 0.0);
  bad[4] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(GridDensity(grid, bad), "non-finite log-density",
                       std::invalid_argument);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GridDensity g = testsupport::random_density(grid, seed, 6.0);
    CHECK(g.normalization_defect() <= 1e-10);
  }
}

TEST_CASE("domain_radius over box corners") {
  CHECK(domain_radius(BoxDomain(2, {0, 0, 0}, {1, 1, 0})) == doctest::Approx(std::sqrt(2.0)));
  CHECK(domain_radius(BoxDomain(2, {-1, -1, 0}, {1, 1, 0})) == doctest::Approx(std::sqrt(2.0)));
  CHECK(domain_radius(BoxDomain(3, {0, 0, 0}, {2, 1, 1})) == doctest::Approx(std::sqrt(6.0)));

  const BoxDomain b(2, {-0.3, 0.2, 0}, {0.4, 1.9, 0});
  double lo_norm = std::hypot(b.lo[0], b.lo[1]);
  double hi_norm = std::hypot(b.hi[0], b.hi[1]);
  CHECK(b.radius() >= lo_norm - 1e-15);
  CHECK(b.radius() >= hi_norm - 1e-15);
}

TEST_CASE("RegularGrid cell volume and interior nodes") {
  RegularGrid grid(BoxDomain(3, {0, -1, 2}, {2, 3, 5}), {4, 8, 6});
  CHECK(grid.size() == 4 * 8 * 6);
  const double vol = grid.domain.volume();
  CHECK(std::abs(grid.cell_volume() * static_cast<double>(grid.size()) - vol) <=
        1e-12 * vol);
  double pt[3];
  for (std::size_t j = 0; j < grid.size(); ++j) {
    grid.node_center(j, pt);
    for (int a = 0; a < 3; ++a) {
      CHECK(pt[a] > grid.domain.lo[a]);
      CHECK(pt[a] < grid.domain.hi[a]);
    }
  }
  // round-trip node index <-> coordinates
  for (std::size_t j : {0ul, 17ul, 191ul}) {
    grid.node_center(j, pt);
    CHECK(grid.cell_of_point(pt) == j);
  }
}

TEST_CASE("DiscreteMeasure validation") {
  CHECK_THROWS_AS(DiscreteMeasure(2, {0.5, 0.5}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure(2, {0.5, 0.5}, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure(2, {0.5, 0.5, 0.2, 0.3}, {0.7, 0.7}),
                  std::invalid_argument);

  const DiscreteMeasure m(2, {0.5, 0.5, 2.0, 0.5}, {0.5, 0.5});
  CHECK_THROWS_AS(m.validate_inside(BoxDomain(2, {0, 0, 0}, {1, 1, 0})),
                  std::invalid_argument);
}

TEST_CASE("duplicate atoms merge by summing weights") {
  const DiscreteMeasure m(2, {0.25, 0.25, 0.75, 0.5, 0.25, 0.25}, {0.2, 0.5, 0.3});
  const DiscreteMeasure merged = m.merged_duplicates();
  REQUIRE(merged.size() == 2);
  CHECK(merged.point(0)[0] == 0.25);
  CHECK(merged.weights[0] == doctest::Approx(0.5));
  CHECK(merged.weights[1] == doctest::Approx(0.5));
}

TEST_CASE("GridHistogram normalization and atom conversion") {
  const auto grid = testsupport::unit_grid_2d(2);
  CHECK_THROWS_WITH_AS(GridHistogram(grid, std::vector<double>(4, 0.0)), "zero-mass input",
                       std::invalid_argument);

  GridHistogram h(grid, {2.0, 0.0, 1.0, 1.0});
  double sum = std::accumulate(h.weights.begin(), h.weights.end(), 0.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  const DiscreteMeasure atoms = h.as_discrete(1e-15);
  CHECK(atoms.size() == 3);  // the zero cell is dropped
}

TEST_CASE("input weight validation") {
  const auto grid = testsupport::unit_grid_2d(2);
  std::vector<InputMeasure> inputs;
  inputs.push_back({GridDensity::uniform(grid), 0.6});
  inputs.push_back({GridDensity::uniform(grid), 0.4});
  CHECK_NOTHROW(validate_input_weights(inputs));
  inputs[1].weight = 0.5;
  CHECK_THROWS_AS(validate_input_weights(inputs), std::invalid_argument);
}
