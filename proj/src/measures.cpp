#include "wbary/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "wbary/errors.hpp"

namespace wbary {

DiscreteMeasure::DiscreteMeasure(int d, std::vector<double> pts, std::vector<double> w)
    : dim(d), points(std::move(pts)), weights(std::move(w)) {
  if (d != 2 && d != 3) throw std::invalid_argument("DiscreteMeasure: dim must be 2 or 3");
  if (weights.empty()) throw std::invalid_argument("DiscreteMeasure: no atoms");
  if (points.size() != weights.size() * static_cast<std::size_t>(d))
    throw std::invalid_argument("DiscreteMeasure: points/weights size mismatch");
  double s = 0.0;
  for (double x : points)
    if (!std::isfinite(x)) throw std::invalid_argument("DiscreteMeasure: non-finite point");
  for (double u : weights) {
    if (!(u >= 0.0)) throw std::invalid_argument("DiscreteMeasure: negative weight");
    s += u;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
}

void DiscreteMeasure::validate_inside(const BoxDomain& box) const {
  if (box.dim != dim) throw std::invalid_argument("dimension mismatch");
  for (std::size_t i = 0; i < size(); ++i)
    if (!box.contains(point(i)))
      throw std::invalid_argument("DiscreteMeasure: atom outside domain");
}

DiscreteMeasure DiscreteMeasure::merged_duplicates() const {
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<double> pts;
  std::vector<double> w;
  for (std::size_t i = 0; i < size(); ++i) {
    std::vector<double> key(point(i), point(i) + dim);
    auto [it, fresh] = seen.emplace(std::move(key), w.size());
    if (fresh) {
      pts.insert(pts.end(), point(i), point(i) + dim);
      w.push_back(weights[i]);
    } else {
      w[it->second] += weights[i];
    }
  }
  // renormalize the accumulated sum back to exactly |sum - 1| <= 1e-12
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return DiscreteMeasure(dim, std::move(pts), std::move(w));
}

double lsp(std::span<const double> v, double delta) {
  if (v.empty()) throw std::invalid_argument("empty grid");
  if (!(delta > 0.0)) throw std::invalid_argument("lsp: delta must be positive");
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(delta * s);
}

GridDensity::GridDensity(RegularGrid g, std::vector<double> logv)
    : grid(std::move(g)), log_values(std::move(logv)) {
  if (log_values.size() != grid.size())
    throw std::invalid_argument("GridDensity: value count != grid size");
  for (double x : log_values)
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite log-density");
  const double shift = lsp(log_values, grid.cell_volume());
  // skip negligible shifts so normalization is idempotent bit-for-bit
  if (std::abs(shift) > 1e-13)
    for (double& x : log_values) x -= shift;
}

std::vector<double> GridDensity::cell_masses() const {
  const double delta = grid.cell_volume();
  std::vector<double> m(log_values.size());
  for (std::size_t j = 0; j < m.size(); ++j) m[j] = delta * std::exp(log_values[j]);
  return m;
}

double GridDensity::normalization_defect() const {
  const double delta = grid.cell_volume();
  double s = 0.0;
  for (double x : log_values) s += std::exp(x);
  return std::abs(delta * s - 1.0);
}

GridDensity GridDensity::uniform(const RegularGrid& g) {
  std::vector<double> logv(g.size(), -std::log(g.domain.volume()));
  return GridDensity(g, std::move(logv));
}

GridHistogram::GridHistogram(RegularGrid g, std::vector<double> w)
    : grid(std::move(g)), weights(std::move(w)) {
  if (weights.size() != grid.size())
    throw std::invalid_argument("GridHistogram: weight count != grid size");
  double s = 0.0;
  for (double u : weights) {
    if (!(u >= 0.0) || !std::isfinite(u))
      throw std::invalid_argument("GridHistogram: weights must be finite and nonnegative");
    s += u;
  }
  if (s <= 0.0) throw std::invalid_argument("zero-mass input");
  if (std::abs(s - 1.0) > 1e-13)
    for (double& u : weights) u /= s;
}

DiscreteMeasure GridHistogram::as_discrete(double drop_below) const {
  const int d = grid.dim();
  std::vector<double> pts;
  std::vector<double> w;
  double pt[3];
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] < drop_below || weights[j] == 0.0) continue;
    grid.node_center(j, pt);
    pts.insert(pts.end(), pt, pt + d);
    w.push_back(weights[j]);
  }
  if (w.empty()) throw std::invalid_argument("zero-mass input");
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return DiscreteMeasure(d, std::move(pts), std::move(w));
}

GaussianMeasure::GaussianMeasure(std::vector<double> mean_, std::vector<double> cov_)
    : dim(static_cast<int>(mean_.size())), mean(std::move(mean_)), cov(std::move(cov_)) {
  if (cov.size() != mean.size() * mean.size())
    throw std::invalid_argument("GaussianMeasure: covariance shape mismatch");
  const int d = dim;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < r; ++c)
      if (std::abs(cov[r * d + c] - cov[c * d + r]) > 1e-12)
        throw std::invalid_argument("invalid covariance: not symmetric");
}

void validate_input_weights(const std::vector<InputMeasure>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("no input measures");
  double s = 0.0;
  for (const auto& in : inputs) {
    if (!(in.weight >= 0.0)) throw std::invalid_argument("input weight must be nonnegative");
    s += in.weight;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("input weights must sum to 1");
}

GridDensity normalize_log_density(const GridDensity& g) {
  // the constructor normalizes; re-running it is the operation
  return GridDensity(g.grid, g.log_values);
}

}  // namespace wbary
