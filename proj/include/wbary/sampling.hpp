#pragma once

#include <cstdint>
#include <vector>

#include "wbary/measures.hpp"

namespace wbary {

// Counter-based generator: value(k) is a pure function of (seed, stream, k),
// so substreams split deterministically and parallel consumers stay
// reproducible regardless of execution order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  CounterRng split(std::uint64_t substream) const;

  double uniform();                       // [0,1), advances the counter
  double uniform_at(std::uint64_t k) const;
  double normal();                        // standard normal (Box-Muller)
  std::uint64_t bits();

 private:
  std::uint64_t raw_at(std::uint64_t k) const;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct SampleSet {
  int dim = 0;
  std::vector<double> points;  // N*d row-major
  std::uint64_t seed = 0;

  std::size_t size() const { return dim ? points.size() / dim : 0; }
  const double* point(std::size_t i) const { return points.data() + static_cast<std::size_t>(dim) * i; }
};

// Draws N i.i.d. samples from the piecewise-constant density: categorical
// cell choice by mass, then uniform jitter inside the cell. Exact for the
// grid density, so every proposal is accepted.
SampleSet rejection_sample(const GridDensity& rho, std::size_t n, std::uint64_t seed);

struct Moments {
  std::vector<double> mean;  // d
  std::vector<double> cov;   // d*d, unbiased
};
Moments empirical_moments(const SampleSet& s);

// Quadrature moments of the grid density itself (cell centers, midpoint rule).
Moments grid_moments(const GridDensity& rho);

// Average over random unit directions of the 1D W2 between projected samples;
// unequal sample counts are handled by exact quantile matching.
double sliced_wasserstein(const SampleSet& a, const SampleSet& b, int n_proj,
                          std::uint64_t seed);
// Deterministic-direction variant (directions row-major n x d, unit norm).
double sliced_wasserstein_dirs(const SampleSet& a, const SampleSet& b,
                               const std::vector<double>& dirs);

struct GaussianFitError {
  double mean_err = 0.0;  // |mean - truth.mean|_2
  double cov_err = 0.0;   // |cov - truth.cov|_F
};
// rejection_sample -> empirical_moments -> distance to the Gaussian truth.
GaussianFitError grid_w2_to_gaussian_truth(const GridDensity& rho, const GaussianMeasure& truth,
                                           std::size_t n, std::uint64_t seed);

}  // namespace wbary
