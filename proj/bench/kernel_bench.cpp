// Times the hot transport sweeps: serial reference vs the optimized
// OpenMP kernels, plus one warm full solve at benchmark scale.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wbary/kernels.hpp"
#include "wbary/measures.hpp"
#include "wbary/sampling.hpp"
#include "wbary/semidiscrete.hpp"

using namespace wbary;
namespace kern = wbary::kernels;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Case {
  std::size_t atoms;
  std::size_t grid_n;
};

void bench_sweeps(const Case& c) {
  const RegularGrid grid(BoxDomain(2, {0, 0, 0}, {1, 1, 0}), {c.grid_n, c.grid_n, 1});
  CounterRng rng(13, 0);
  std::vector<double> pts(2 * c.atoms);
  for (auto& x : pts) x = rng.uniform();
  const DiscreteMeasure mu(2, pts,
                           std::vector<double>(c.atoms, 1.0 / static_cast<double>(c.atoms)));

  const std::size_t M = grid.size();
  std::vector<std::vector<double>> atom_axes(2, std::vector<double>(c.atoms));
  for (std::size_t i = 0; i < c.atoms; ++i) {
    atom_axes[0][i] = mu.point(i)[0];
    atom_axes[1][i] = mu.point(i)[1];
  }
  auto node_axes = grid.node_table();
  kern::AtomsView atoms{2, c.atoms, {atom_axes[0].data(), atom_axes[1].data(), nullptr}};
  kern::NodesView nodes{2, M, {node_axes[0].data(), node_axes[1].data(), nullptr}};

  std::vector<double> phi(c.atoms, 0.0);
  for (auto& p : phi) p = 0.01 * (rng.uniform() - 0.5);
  std::vector<double> shifted;
  kern::shifted_offsets(atoms, phi, shifted);

  std::vector<double> raw(M), ref_vals(M);
  std::vector<std::uint32_t> assign(M), ref_assign(M);

  const int reps = c.atoms * M > 10'000'000 ? 3 : 10;

  double t0 = now_s();
  for (int r = 0; r < reps; ++r) kern::ctransform_ref(atoms, phi, nodes, ref_vals, ref_assign);
  const double t_ref = (now_s() - t0) / reps;

  t0 = now_s();
  for (int r = 0; r < reps; ++r) kern::ctransform_minvals(atoms, shifted, nodes, raw);
  const double t_min = (now_s() - t0) / reps;

  t0 = now_s();
  for (int r = 0; r < reps; ++r) {
    kern::ctransform_minvals(atoms, shifted, nodes, raw);
    kern::ctransform_argmin(atoms, shifted, nodes, raw, assign);
  }
  const double t_full = (now_s() - t0) / reps;

  const double gcells = static_cast<double>(c.atoms) * static_cast<double>(M) * 1e-9;
  std::printf("m=%-6zu M=%-7zu | ref %8.2f ms | minvals %8.2f ms | +argmin %8.2f ms | "
              "%5.2f Gpairs/s | speedup %4.1fx\n",
              c.atoms, M, 1e3 * t_ref, 1e3 * t_min, 1e3 * t_full, gcells / t_min,
              t_ref / t_full);
}

void bench_solve() {
  const RegularGrid grid(BoxDomain(2, {0, 0, 0}, {1, 1, 0}), {64, 64, 1});
  const GridDensity nu = GridDensity::uniform(grid);
  CounterRng rng(31, 0);
  const std::size_t m = 2000;
  std::vector<double> pts(2 * m);
  for (auto& x : pts) x = 0.1 + 0.8 * rng.uniform();
  const DiscreteMeasure mu(2, pts, std::vector<double>(m, 1.0 / static_cast<double>(m)));

  const double t0 = now_s();
  const SemiDiscreteSolution sol = solve_semidiscrete(mu, nu);
  const double t1 = now_s();
  std::printf("cold solve m=%zu M=%zu: %.2f s, %d iterations, grad %.2e (%s)\n", m,
              grid.size(), t1 - t0, sol.iterations, sol.grad_norm,
              to_string(sol.status).c_str());
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled (serial build)\n");
#endif
  for (const Case& c : {Case{500, 64}, Case{2000, 64}, Case{2000, 128}, Case{8000, 128}})
    bench_sweeps(c);
  bench_solve();
  return 0;
}
