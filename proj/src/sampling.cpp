#include "wbary/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wbary {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng CounterRng::split(std::uint64_t substream) const {
  return CounterRng(seed_, mix64(stream_ ^ (0xd1b54a32d192ed03ULL * (substream + 1))));
}

std::uint64_t CounterRng::raw_at(std::uint64_t k) const {
  return mix64(mix64(seed_ ^ 0x5851f42d4c957f2dULL) ^ mix64(stream_) ^
               (0x9e3779b97f4a7c15ULL * k));
}

double CounterRng::uniform_at(std::uint64_t k) const {
  return static_cast<double>(raw_at(k) >> 11) * 0x1.0p-53;
}

double CounterRng::uniform() { return uniform_at(counter_++); }

std::uint64_t CounterRng::bits() { return raw_at(counter_++); }

double CounterRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // u1 in (0,1] so the log is finite
  const double u1 = (static_cast<double>(raw_at(counter_++) >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform_at(counter_++);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  have_spare_ = true;
  return r * std::cos(t);
}

SampleSet rejection_sample(const GridDensity& rho, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("rejection_sample: need N >= 1");
  const RegularGrid& grid = rho.grid;
  const int d = grid.dim();
  const std::size_t M = rho.size();
  const std::vector<double> masses = rho.cell_masses();
  std::vector<double> cdf(M);
  double acc = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    acc += masses[j];
    cdf[j] = acc;
  }
  const double total = acc;

  CounterRng rng(seed, 0x5a6d704c65ULL);
  SampleSet out;
  out.dim = d;
  out.seed = seed;
  out.points.resize(n * static_cast<std::size_t>(d));
  double center[3];
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform() * total;
    const std::size_t j = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const std::size_t cell = std::min(j, M - 1);
    grid.node_center(cell, center);
    for (int a = 0; a < d; ++a) {
      const double h = grid.axis_step(a);
      out.points[s * d + a] = center[a] + (rng.uniform() - 0.5) * h;
    }
  }
  return out;
}

Moments empirical_moments(const SampleSet& s) {
  const std::size_t n = s.size();
  if (n < 2) throw std::invalid_argument("empirical_moments: need N >= 2");
  const int d = s.dim;
  Moments m;
  m.mean.assign(d, 0.0);
  m.cov.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) m.mean[a] += s.point(i)[a];
  for (int a = 0; a < d; ++a) m.mean[a] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = s.point(i);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b <= a; ++b)
        m.cov[a * d + b] += (p[a] - m.mean[a]) * (p[b] - m.mean[b]);
  }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b <= a; ++b) {
      m.cov[a * d + b] /= static_cast<double>(n - 1);
      m.cov[b * d + a] = m.cov[a * d + b];
    }
  return m;
}

Moments grid_moments(const GridDensity& rho) {
  const int d = rho.grid.dim();
  const std::size_t M = rho.size();
  const std::vector<double> masses = rho.cell_masses();
  Moments m;
  m.mean.assign(d, 0.0);
  m.cov.assign(static_cast<std::size_t>(d) * d, 0.0);
  double total = 0.0;
  double pt[3];
  for (std::size_t j = 0; j < M; ++j) {
    rho.grid.node_center(j, pt);
    total += masses[j];
    for (int a = 0; a < d; ++a) m.mean[a] += masses[j] * pt[a];
  }
  for (int a = 0; a < d; ++a) m.mean[a] /= total;
  // second moment of the piecewise-constant density adds the within-cell
  // uniform variance h^2/12 on the diagonal
  for (std::size_t j = 0; j < M; ++j) {
    rho.grid.node_center(j, pt);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b <= a; ++b)
        m.cov[a * d + b] += masses[j] * (pt[a] - m.mean[a]) * (pt[b] - m.mean[b]);
  }
  for (int a = 0; a < d; ++a) {
    const double h = rho.grid.axis_step(a);
    m.cov[a * d + a] += total * h * h / 12.0;
  }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b <= a; ++b) {
      m.cov[a * d + b] /= total;
      m.cov[b * d + a] = m.cov[a * d + b];
    }
  return m;
}

namespace {

// exact squared 1D W2 between empirical quantile functions
double w2sq_1d(std::vector<double>& a, std::vector<double>& b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  if (na == nb) {
    double s = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
      const double t = a[i] - b[i];
      s += t * t;
    }
    return s / static_cast<double>(na);
  }
  double s = 0.0;
  std::size_t ia = 0, ib = 0;
  double q = 0.0;
  while (ia < na && ib < nb) {
    const double qa = static_cast<double>(ia + 1) / static_cast<double>(na);
    const double qb = static_cast<double>(ib + 1) / static_cast<double>(nb);
    const double qn = std::min(qa, qb);
    const double t = a[ia] - b[ib];
    s += (qn - q) * t * t;
    q = qn;
    if (qa <= qn) ++ia;
    if (qb <= qn) ++ib;
  }
  return s;
}

}  // namespace

double sliced_wasserstein_dirs(const SampleSet& a, const SampleSet& b,
                               const std::vector<double>& dirs) {
  if (a.dim != b.dim) throw std::invalid_argument("dimension mismatch");
  const int d = a.dim;
  const std::size_t np = dirs.size() / static_cast<std::size_t>(d);
  if (np == 0) throw std::invalid_argument("sliced_wasserstein: no projections");
  double total = 0.0;
  std::vector<double> pa(a.size()), pb(b.size());
  for (std::size_t p = 0; p < np; ++p) {
    const double* dir = dirs.data() + p * d;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += dir[k] * a.point(i)[k];
      pa[i] = s;
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += dir[k] * b.point(i)[k];
      pb[i] = s;
    }
    total += std::sqrt(std::max(0.0, w2sq_1d(pa, pb)));
  }
  return total / static_cast<double>(np);
}

double sliced_wasserstein(const SampleSet& a, const SampleSet& b, int n_proj,
                          std::uint64_t seed) {
  if (a.dim != b.dim) throw std::invalid_argument("dimension mismatch");
  const int d = a.dim;
  std::vector<double> dirs(static_cast<std::size_t>(n_proj) * d);
  CounterRng rng(seed, 0x53574400ULL);
  for (int p = 0; p < n_proj; ++p) {
    // per-projection substream: direction p is independent of the others
    CounterRng sub = rng.split(static_cast<std::uint64_t>(p));
    double norm = 0.0;
    while (norm == 0.0) {
      for (int k = 0; k < d; ++k) {
        dirs[static_cast<std::size_t>(p) * d + k] = sub.normal();
        norm += dirs[static_cast<std::size_t>(p) * d + k] *
                dirs[static_cast<std::size_t>(p) * d + k];
      }
    }
    norm = std::sqrt(norm);
    for (int k = 0; k < d; ++k) dirs[static_cast<std::size_t>(p) * d + k] /= norm;
  }
  return sliced_wasserstein_dirs(a, b, dirs);
}

GaussianFitError grid_w2_to_gaussian_truth(const GridDensity& rho, const GaussianMeasure& truth,
                                           std::size_t n, std::uint64_t seed) {
  const SampleSet s = rejection_sample(rho, n, seed);
  const Moments m = empirical_moments(s);
  const int d = truth.dim;
  GaussianFitError err;
  double msq = 0.0;
  for (int a = 0; a < d; ++a) {
    const double t = m.mean[a] - truth.mean[a];
    msq += t * t;
  }
  err.mean_err = std::sqrt(msq);
  double csq = 0.0;
  for (std::size_t k = 0; k < m.cov.size(); ++k) {
    const double t = m.cov[k] - truth.cov[k];
    csq += t * t;
  }
  err.cov_err = std::sqrt(csq);
  return err;
}

}  // namespace wbary
