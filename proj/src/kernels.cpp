#include "wbary/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wbary::kernels {

namespace {

// The per-element value v_i = shifted_i - <x_i, y> must be computed with the
// exact same operations in the vectorized min pass and the scalar argmin
// scan, so the scan's equality test recovers the lowest attaining index.
// std::fma pins the arithmetic. The sweeps are written out inline: gcc does
// not inline helper calls across the OpenMP outlining boundary, which would
// leave the hot loop scalar.

template <int D>
void minvals_impl(const AtomsView& atoms, std::span<const double> shifted,
                  const NodesView& nodes, std::span<double> raw) {
  const std::size_t M = nodes.count;
  const std::size_t m = atoms.count;
  const double* const xs0 = atoms.xs[0];
  const double* const xs1 = atoms.xs[1];
  const double* const xs2 = D == 3 ? atoms.xs[2] : nullptr;
  const double* const sh = shifted.data();
  const std::int64_t nchunk = static_cast<std::int64_t>((M + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < nchunk; ++c) {
    const std::size_t j0 = static_cast<std::size_t>(c) * kChunk;
    const std::size_t j1 = std::min(M, j0 + kChunk);
    for (std::size_t j = j0; j < j1; ++j) {
      const double yx = nodes.ys[0][j];
      const double yy = nodes.ys[1][j];
      const double yz = D == 3 ? nodes.ys[2][j] : 0.0;
      double mv = std::numeric_limits<double>::infinity();
#pragma omp simd reduction(min : mv)
      for (std::size_t i = 0; i < m; ++i) {
        double v = std::fma(-xs0[i], yx, sh[i]);
        v = std::fma(-xs1[i], yy, v);
        if constexpr (D == 3) v = std::fma(-xs2[i], yz, v);
        mv = v < mv ? v : mv;
      }
      raw[j] = mv;
    }
  }
}

template <int D>
void argmin_impl(const AtomsView& atoms, std::span<const double> shifted,
                 const NodesView& nodes, std::span<const double> raw,
                 std::span<std::uint32_t> assignment) {
  const std::size_t M = nodes.count;
  const std::size_t m = atoms.count;
  const double* const xs0 = atoms.xs[0];
  const double* const xs1 = atoms.xs[1];
  const double* const xs2 = D == 3 ? atoms.xs[2] : nullptr;
  const double* const sh = shifted.data();
  const std::int64_t nchunk = static_cast<std::int64_t>((M + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < nchunk; ++c) {
    const std::size_t j0 = static_cast<std::size_t>(c) * kChunk;
    const std::size_t j1 = std::min(M, j0 + kChunk);
    for (std::size_t j = j0; j < j1; ++j) {
      const double yx = nodes.ys[0][j];
      const double yy = nodes.ys[1][j];
      const double yz = D == 3 ? nodes.ys[2][j] : 0.0;
      const double mv = raw[j];
      std::uint32_t arg = 0;
      for (std::size_t i = 0; i < m; ++i) {
        double v = std::fma(-xs0[i], yx, sh[i]);
        v = std::fma(-xs1[i], yy, v);
        if constexpr (D == 3) v = std::fma(-xs2[i], yz, v);
        if (v == mv) {
          arg = static_cast<std::uint32_t>(i);
          break;
        }
      }
      assignment[j] = arg;
    }
  }
}

}  // namespace

void shifted_offsets(const AtomsView& atoms, std::span<const double> phi,
                     std::vector<double>& shifted) {
  const std::size_t m = atoms.count;
  shifted.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (int a = 0; a < atoms.dim; ++a) s += atoms.xs[a][i] * atoms.xs[a][i];
    shifted[i] = 0.5 * s - phi[i];
  }
}

void ctransform_minvals(const AtomsView& atoms, std::span<const double> shifted,
                        const NodesView& nodes, std::span<double> raw) {
  if (atoms.dim == 2)
    minvals_impl<2>(atoms, shifted, nodes, raw);
  else
    minvals_impl<3>(atoms, shifted, nodes, raw);
}

void ctransform_argmin(const AtomsView& atoms, std::span<const double> shifted,
                       const NodesView& nodes, std::span<const double> raw,
                       std::span<std::uint32_t> assignment) {
  if (atoms.dim == 2)
    argmin_impl<2>(atoms, shifted, nodes, raw, assignment);
  else
    argmin_impl<3>(atoms, shifted, nodes, raw, assignment);
}

void ctransform_ref(const AtomsView& atoms, std::span<const double> phi,
                    const NodesView& nodes, std::span<double> values,
                    std::span<std::uint32_t> assignment) {
  const std::size_t M = nodes.count;
  const std::size_t m = atoms.count;
  const int d = atoms.dim;
  for (std::size_t j = 0; j < M; ++j) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double sq = 0.0;
      for (int a = 0; a < d; ++a) {
        const double t = nodes.ys[a][j] - atoms.xs[a][i];
        sq += t * t;
      }
      const double v = 0.5 * sq - phi[i];
      if (v < best) {
        best = v;
        arg = static_cast<std::uint32_t>(i);
      }
    }
    values[j] = best;
    assignment[j] = arg;
  }
}

void cell_masses(std::span<const std::uint32_t> assignment,
                 std::span<const double> node_mass, std::size_t atom_count,
                 std::vector<double>& masses) {
  const std::size_t M = assignment.size();
  const std::size_t nchunk = (M + kChunk - 1) / kChunk;
  if (nchunk <= 1) {
    cell_masses_ref(assignment, node_mass, atom_count, masses);
    return;
  }
  std::vector<double> partial(nchunk * atom_count, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunk); ++c) {
    double* local = partial.data() + static_cast<std::size_t>(c) * atom_count;
    const std::size_t j0 = static_cast<std::size_t>(c) * kChunk;
    const std::size_t j1 = std::min(M, j0 + kChunk);
    for (std::size_t j = j0; j < j1; ++j) local[assignment[j]] += node_mass[j];
  }
  masses.assign(atom_count, 0.0);
  for (std::size_t c = 0; c < nchunk; ++c) {
    const double* local = partial.data() + c * atom_count;
    for (std::size_t i = 0; i < atom_count; ++i) masses[i] += local[i];
  }
}

void cell_masses_ref(std::span<const std::uint32_t> assignment,
                     std::span<const double> node_mass, std::size_t atom_count,
                     std::vector<double>& masses) {
  masses.assign(atom_count, 0.0);
  for (std::size_t j = 0; j < assignment.size(); ++j)
    masses[assignment[j]] += node_mass[j];
}

double weighted_sum(std::span<const double> a, std::span<const double> b) {
  const std::size_t M = a.size();
  const std::size_t nchunk = (M + kChunk - 1) / kChunk;
  if (nchunk <= 1) return weighted_sum_ref(a, b);
  std::vector<double> partial(nchunk, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunk); ++c) {
    const std::size_t j0 = static_cast<std::size_t>(c) * kChunk;
    const std::size_t j1 = std::min(M, j0 + kChunk);
    double s = 0.0;
    for (std::size_t j = j0; j < j1; ++j) s += a[j] * b[j];
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double weighted_sum_ref(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

}  // namespace wbary::kernels
