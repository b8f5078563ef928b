#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wbary::kernels {

// Hot data-parallel sweeps shared by the transport solvers. Each kernel has a
// plain serial reference (_ref) used as a test oracle and an optimized
// OpenMP-parallel version. The parallel versions reduce over fixed-size node
// chunks combined in chunk order, so results are bit-identical for any thread
// count.

inline constexpr std::size_t kChunk = 2048;

// Atom coordinates are passed axis-separated: xs[a][i], a < d.
struct AtomsView {
  int dim = 0;
  std::size_t count = 0;
  const double* xs[3] = {nullptr, nullptr, nullptr};
};

struct NodesView {
  int dim = 0;
  std::size_t count = 0;
  const double* ys[3] = {nullptr, nullptr, nullptr};
};

// shifted[i] = |x_i|^2/2 - phi_i; the c-transform at node y is then
// |y|^2/2 + min_i (shifted[i] - <x_i, y>).
void shifted_offsets(const AtomsView& atoms, std::span<const double> phi,
                     std::vector<double>& shifted);

// raw[j] = min_i (shifted[i] - <x_i, y_j>), no argmin. One fused line-search
// trial evaluation costs exactly one of these sweeps.
void ctransform_minvals(const AtomsView& atoms, std::span<const double> shifted,
                        const NodesView& nodes, std::span<double> raw);

// Lowest atom index attaining raw[j]; raw must come from ctransform_minvals
// with the same shifted vector (per-element arithmetic is fma-pinned so the
// equality scan is exact).
void ctransform_argmin(const AtomsView& atoms, std::span<const double> shifted,
                       const NodesView& nodes, std::span<const double> raw,
                       std::span<std::uint32_t> assignment);

// Naive direct-formula oracle (serial): values[j] = min_i (|y_j - x_i|^2/2
// - phi_i) with lowest-index ties, full values (not raw).
void ctransform_ref(const AtomsView& atoms, std::span<const double> phi,
                    const NodesView& nodes, std::span<double> values,
                    std::span<std::uint32_t> assignment);

// masses[i] = sum of node_mass[j] over nodes assigned to atom i.
void cell_masses(std::span<const std::uint32_t> assignment,
                 std::span<const double> node_mass, std::size_t atom_count,
                 std::vector<double>& masses);
void cell_masses_ref(std::span<const std::uint32_t> assignment,
                     std::span<const double> node_mass, std::size_t atom_count,
                     std::vector<double>& masses);

// sum_j a_j * b_j with deterministic chunked accumulation.
double weighted_sum(std::span<const double> a, std::span<const double> b);
double weighted_sum_ref(std::span<const double> a, std::span<const double> b);

}  // namespace wbary::kernels
