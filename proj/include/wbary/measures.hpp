#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "wbary/grid.hpp"

namespace wbary {

// Weighted atoms in R^d, points stored row-major (m x d).
struct DiscreteMeasure {
  int dim = 0;
  std::vector<double> points;   // m*d
  std::vector<double> weights;  // m, nonnegative, sums to 1

  DiscreteMeasure() = default;
  DiscreteMeasure(int d, std::vector<double> pts, std::vector<double> w);

  std::size_t size() const { return weights.size(); }
  const double* point(std::size_t i) const { return points.data() + static_cast<std::size_t>(dim) * i; }

  void validate_inside(const BoxDomain& box) const;
  // Sums weights of coincident atoms; atom order = first occurrence.
  DiscreteMeasure merged_duplicates() const;
};

// Strictly positive probability density on a regular grid, stored as
// log-density at cell centers and kept normalized: lsp(log_values, Delta) = 0.
struct GridDensity {
  RegularGrid grid;
  std::vector<double> log_values;  // M

  GridDensity() = default;
  GridDensity(RegularGrid g, std::vector<double> logv);  // normalizes

  std::size_t size() const { return log_values.size(); }
  // Delta * exp(log rho_j), one per node
  std::vector<double> cell_masses() const;
  double normalization_defect() const;  // |Delta * sum exp(log rho) - 1|

  static GridDensity uniform(const RegularGrid& g);
};

// Nonnegative weights on a regular grid summing to 1 (histogram input).
struct GridHistogram {
  RegularGrid grid;
  std::vector<double> weights;  // M, >= 0, sums to 1

  GridHistogram() = default;
  GridHistogram(RegularGrid g, std::vector<double> w);  // normalizes, checks sign

  std::size_t size() const { return weights.size(); }
  // Atoms at cell centers carrying the weights; zero-weight cells dropped
  // when drop_below > 0.
  DiscreteMeasure as_discrete(double drop_below = 0.0) const;
};

struct GaussianMeasure {
  int dim = 0;
  std::vector<double> mean;  // d
  std::vector<double> cov;   // d*d row-major, SPD

  GaussianMeasure() = default;
  GaussianMeasure(std::vector<double> mean_, std::vector<double> cov_);
};

// One barycenter input: a measure plus its weight w_i.
struct InputMeasure {
  std::variant<DiscreteMeasure, GridHistogram, GridDensity, GaussianMeasure> measure;
  double weight = 0.0;
};

// Checks each w_i >= 0 and sum w_i = 1 within 1e-12.
void validate_input_weights(const std::vector<InputMeasure>& inputs);

// log sum_i Delta * exp(v_i), computed with a max shift.
double lsp(std::span<const double> v, double delta);

// Shifts log-density so that lsp(result, Delta) = 0.
GridDensity normalize_log_density(const GridDensity& g);

}  // namespace wbary
