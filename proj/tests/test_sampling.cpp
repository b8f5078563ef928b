#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "wbary/sampling.hpp"

using namespace wbary;

TEST_CASE("counter rng: determinism, range, split independence") {
  CounterRng a(42, 0);
  CounterRng b(42, 0);
  for (int i = 0; i < 100; ++i) {
    const double ua = a.uniform();
    CHECK(ua == b.uniform());
    CHECK(ua >= 0.0);
    CHECK(ua < 1.0);
  }
  CounterRng c(42, 0);
  CounterRng d = c.split(1);
  CounterRng e = c.split(2);
  CHECK(d.uniform() != e.uniform());
  CHECK(c.uniform_at(7) == CounterRng(42, 0).uniform_at(7));

  // normals have roughly unit scale
  CounterRng g(7, 3);
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = g.normal();
    mean += x;
    var += x * x;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sampler determinism and support") {
  const auto grid = testsupport::unit_grid_2d(4);
  const GridDensity rho = testsupport::random_density(grid, 5);
  const SampleSet s1 = rejection_sample(rho, 500, 99);
  const SampleSet s2 = rejection_sample(rho, 500, 99);
  REQUIRE(s1.points.size() == s2.points.size());
  for (std::size_t k = 0; k < s1.points.size(); ++k) CHECK(s1.points[k] == s2.points[k]);
  for (std::size_t i = 0; i < s1.size(); ++i)
    CHECK(grid.domain.contains(s1.point(i)));
}

TEST_CASE("sampler concentrates on a dominating cell") {
  const auto grid = testsupport::unit_grid_2d(4);
  std::vector<double> logv(grid.size(), -40.0);
  logv[5] = 0.0;  // all mass up to ~1e-17 in cell 5
  const GridDensity rho(grid, std::move(logv));
  const SampleSet s = rejection_sample(rho, 2000, 7);
  double pt[3];
  grid.node_center(5, pt);
  const double h = grid.axis_step(0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(s.point(i)[0] - pt[0]) <= 0.5 * h + 1e-12);
    CHECK(std::abs(s.point(i)[1] - pt[1]) <= 0.5 * h + 1e-12);
  }
}

TEST_CASE("chi-square occupancy of the uniform density") {
  // M = 16 cells, N = 1e5 draws, 99% quantile of chi2(15) = 30.5779141669
  const auto grid = testsupport::unit_grid_2d(4);
  const GridDensity rho = GridDensity::uniform(grid);
  const std::size_t N = 100000;
  const SampleSet s = rejection_sample(rho, N, 2026);
  std::vector<double> counts(grid.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) counts[grid.cell_of_point(s.point(i))] += 1.0;
  const double expected = static_cast<double>(N) / static_cast<double>(grid.size());
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 <= 30.5779141669);
}

TEST_CASE("empirical moments closed forms") {
  SampleSet same;
  same.dim = 2;
  same.points = {1.5, -2.0, 1.5, -2.0, 1.5, -2.0};
  const Moments m0 = empirical_moments(same);
  for (double c : m0.cov) CHECK(c == doctest::Approx(0.0).epsilon(1e-14));

  SampleSet two;
  two.dim = 2;
  two.points = {0.0, 0.0, 2.0, 0.0};
  const Moments m1 = empirical_moments(two);
  CHECK(m1.mean[0] == doctest::Approx(1.0));
  CHECK(m1.mean[1] == doctest::Approx(0.0));
  CHECK(m1.cov[0] == doctest::Approx(2.0));  // unbiased: (1 + 1) / (2 - 1)
  CHECK(m1.cov[3] == doctest::Approx(0.0));
}

TEST_CASE("sample moments track grid quadrature moments") {
  const auto grid = testsupport::box_grid_2d(-1.0, 1.0, 8);
  const GridDensity rho = testsupport::random_density(grid, 11);
  const Moments quad = grid_moments(rho);
  const std::size_t N = 200000;
  const SampleSet s = rejection_sample(rho, N, 5);
  const Moments emp = empirical_moments(s);
  const double band = 3.0 / std::sqrt(static_cast<double>(N));
  for (int a = 0; a < 2; ++a)
    CHECK(std::abs(emp.mean[a] - quad.mean[a]) <= band * 2.0);  // sigma <= 2 on this box
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(emp.cov[k] - quad.cov[k]) <= band * 4.0);
}

TEST_CASE("sliced distance: identity, fixed direction, symmetry, triangle") {
  SampleSet a;
  a.dim = 2;
  a.points = {0.0, 0.0, 0.25, 0.5, 0.75, 0.125};
  CHECK(sliced_wasserstein(a, a, 16, 3) == 0.0);

  SampleSet zero, e1;
  zero.dim = 2;
  e1.dim = 2;
  for (int i = 0; i < 4; ++i) {
    zero.points.insert(zero.points.end(), {0.0, 0.0});
    e1.points.insert(e1.points.end(), {1.0, 0.0});
  }
  CHECK(sliced_wasserstein_dirs(zero, e1, {1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));

  const auto grid = testsupport::unit_grid_2d(3);
  const SampleSet s1 = rejection_sample(testsupport::random_density(grid, 1), 64, 10);
  const SampleSet s2 = rejection_sample(testsupport::random_density(grid, 2), 64, 11);
  const SampleSet s3 = rejection_sample(testsupport::random_density(grid, 3), 64, 12);
  const double d12 = sliced_wasserstein(s1, s2, 8, 77);
  const double d21 = sliced_wasserstein(s2, s1, 8, 77);
  CHECK(std::abs(d12 - d21) <= 1e-12);
  const double d13 = sliced_wasserstein(s1, s3, 8, 77);
  const double d23 = sliced_wasserstein(s2, s3, 8, 77);
  CHECK(d13 <= d12 + d23 + 1e-12);
}

TEST_CASE("sliced distance with unequal counts matches quantile overlap") {
  SampleSet a, b;
  a.dim = 2;
  b.dim = 2;
  a.points = {0.0, 0.0, 1.0, 0.0};                          // {0, 1}
  b.points = {0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0};      // {0, 0, 1, 1}
  CHECK(sliced_wasserstein_dirs(a, b, {1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-14));

  SampleSet c, d;
  c.dim = 2;
  d.dim = 2;
  c.points = {0.0, 0.0};
  d.points = {1.0, 0.0, 1.0, 0.0};
  CHECK(sliced_wasserstein_dirs(c, d, {1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gaussian fit error: translation invariance and symmetric means") {
  const auto grid = testsupport::box_grid_2d(-2.0, 2.0, 16);
  const GridDensity rho = testsupport::random_density(grid, 21);
  const GaussianMeasure truth({0.1, -0.3}, {0.5, 0.0, 0.0, 0.7});
  const GaussianFitError e1 = grid_w2_to_gaussian_truth(rho, truth, 50000, 9);

  // shift both the density grid and the truth by t: identical sampling jitter
  const RegularGrid shifted(BoxDomain(2, {-1.0, 0.0, 0.0}, {3.0, 4.0, 0.0}), {16, 16, 1});
  const GridDensity rho2(shifted, rho.log_values);
  const GaussianMeasure truth2({1.1, 1.7}, truth.cov);
  const GaussianFitError e2 = grid_w2_to_gaussian_truth(rho2, truth2, 50000, 9);
  CHECK(e1.mean_err == doctest::Approx(e2.mean_err).epsilon(1e-9));
  CHECK(e1.cov_err == doctest::Approx(e2.cov_err).epsilon(1e-9));

  // density symmetric about the truth mean: mean error within the CLT band
  const auto g2 = testsupport::box_grid_2d(-1.0, 1.0, 8);
  const GridDensity uni = GridDensity::uniform(g2);
  const GaussianMeasure centered({0.0, 0.0}, {1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0});
  const std::size_t N = 100000;
  const GaussianFitError e3 = grid_w2_to_gaussian_truth(uni, centered, N, 31);
  CHECK(e3.mean_err <= 3.0 / std::sqrt(static_cast<double>(N)));
  CHECK(e3.cov_err <= 0.01);
}
