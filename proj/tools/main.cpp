#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "wbary/errors.hpp"
#include "wbary/gaussian.hpp"
#include "wbary/io.hpp"
#include "wbary/mirror.hpp"
#include "wbary/sampling.hpp"

namespace {

using namespace wbary;

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitSolver = 4;
constexpr int kExitInvariant = 5;

io::KeyValues barycenter_defaults() {
  io::KeyValues kv;
  kv.set("grid", "64,64");
  kv.set("domain", "auto");
  kv.set("margin", "0.25");
  kv.set("schedule", "inverse_sqrt_k");
  kv.set("schedule_c", "1");
  kv.set("schedule_alpha", "0.5");
  kv.set("T", "100");
  kv.set("tol_grad", "1e-6");
  kv.set("max_iters", "500");
  kv.set("warm_max_iters", "60");
  kv.set("min_step", "1e-12");
  kv.set("momentum", "0");
  kv.set("seed", "0");
  kv.set("eval_stride", "1");
  kv.set("strict", "0");
  kv.set("store_best", "1");
  kv.set("warm_start", "1");
  kv.set("gaussian_atoms", "2000");
  kv.set("threads", "0");
  kv.set("trace_wall_ms", "0");
  kv.set("max_entries", "4000000");
  kv.set("out_density", "barycenter_density.txt");
  kv.set("out_trace", "trace.csv");
  kv.set("out_summary", "summary.txt");
  return kv;
}

io::KeyValues gaussian_defaults() {
  io::KeyValues kv;
  kv.set("schedule", "power");
  kv.set("schedule_c", "0.5");
  kv.set("schedule_alpha", "0");
  kv.set("T", "500");
  kv.set("out_cov", "barycenter_cov.txt");
  kv.set("out_trace", "bw_trace.csv");
  return kv;
}

void dump_config(const io::KeyValues& kv) {
  for (const auto& [k, v] : kv.values) std::cout << k << "=" << v << "\n";
}

io::KeyValues load_config(const io::KeyValues& defaults, const std::string& config_path,
                          const std::vector<std::string>& overrides) {
  io::KeyValues kv = defaults;
  if (!config_path.empty()) {
    const io::KeyValues file = io::read_config(config_path);
    for (const auto& [k, v] : file.values) kv.set(k, v);
  }
  for (const auto& o : overrides) io::apply_override(kv, o);
  return kv;
}

void set_threads(const io::KeyValues& kv) {
#ifdef _OPENMP
  const long t = kv.get_long("threads", 0);
  if (t > 0) omp_set_num_threads(static_cast<int>(t));
#else
  (void)kv;
#endif
}

struct NamedInput {
  std::string path;
  std::string kind;
  double weight = 1.0;
  bool explicit_weight = false;
};

std::vector<NamedInput> collect_inputs(const io::KeyValues& kv) {
  std::vector<NamedInput> inputs;
  for (std::size_t i = 0;; ++i) {
    const std::string prefix = "input." + std::to_string(i) + ".";
    if (!kv.has(prefix + "path")) break;
    NamedInput in;
    in.path = kv.get(prefix + "path", "");
    in.kind = kv.get(prefix + "kind", "pointcloud_csv");
    in.explicit_weight = kv.has(prefix + "weight");
    in.weight = kv.get_double(prefix + "weight", 1.0);
    inputs.push_back(std::move(in));
  }
  if (inputs.empty()) throw ParseError("no inputs configured (input.0.path missing)");
  return inputs;
}

void normalize_weights(std::vector<NamedInput>& inputs) {
  double s = 0.0;
  bool any_explicit = false;
  for (const auto& in : inputs) {
    s += in.weight;
    any_explicit = any_explicit || in.explicit_weight;
  }
  if (s <= 0.0) throw ParseError("input weights must have positive sum");
  if (any_explicit && std::abs(s - 1.0) > 1e-12)
    std::fprintf(stderr, "[warn] input weights sum to %.17g; normalizing\n", s);
  for (auto& in : inputs) in.weight /= s;
}

Schedule schedule_from(const io::KeyValues& kv) {
  Schedule s;
  const std::string kind = kv.get("schedule", "inverse_sqrt_k");
  if (kind == "inverse_sqrt_k")
    s.kind = ScheduleKind::InverseSqrtK;
  else if (kind == "constant_over_sqrtT")
    s.kind = ScheduleKind::ConstantOverSqrtT;
  else if (kind == "power")
    s.kind = ScheduleKind::Power;
  else
    throw ParseError("unknown schedule '" + kind + "'");
  s.c = kv.get_double("schedule_c", 1.0);
  s.alpha = kv.get_double("schedule_alpha", 0.5);
  s.T = static_cast<int>(kv.get_long("T", 100));
  if (s.T < 0) throw ParseError("T must be >= 0");
  return s;
}

RunOptions run_options_from(const io::KeyValues& kv) {
  RunOptions opts;
  opts.inner.tol_grad = kv.get_double("tol_grad", 1e-6);
  opts.inner.max_iters = static_cast<int>(kv.get_long("max_iters", 500));
  opts.warm_max_iters = static_cast<int>(kv.get_long("warm_max_iters", 60));
  opts.inner.min_step = kv.get_double("min_step", 1e-12);
  opts.inner.momentum = kv.get_long("momentum", 0) != 0;
  opts.discrete.max_entries = static_cast<std::size_t>(kv.get_long("max_entries", 4000000));
  opts.seed = static_cast<std::uint64_t>(kv.get_long("seed", 0));
  opts.gaussian_atoms = static_cast<std::size_t>(kv.get_long("gaussian_atoms", 2000));
  opts.eval_stride = static_cast<int>(kv.get_long("eval_stride", 1));
  opts.strict = kv.get_long("strict", 0) != 0;
  opts.store_best = kv.get_long("store_best", 1) != 0;
  opts.warm_start = kv.get_long("warm_start", 1) != 0;
  return opts;
}

// support bounding box over concrete inputs; Gaussians must be pre-sampled
void grow_box(const InputMeasure& in, int& dim, std::vector<double>& lo,
              std::vector<double>& hi) {
  auto grow = [&](const double* p, int d) {
    if (dim == 0) {
      dim = d;
      lo.assign(p, p + d);
      hi.assign(p, p + d);
      return;
    }
    if (dim != d) throw ParseError("dimension mismatch across inputs");
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  };
  if (const auto* dm = std::get_if<DiscreteMeasure>(&in.measure)) {
    for (std::size_t i = 0; i < dm->size(); ++i) grow(dm->point(i), dm->dim);
  } else if (const auto* gh = std::get_if<GridHistogram>(&in.measure)) {
    grow(gh->grid.domain.lo.data(), gh->grid.dim());
    grow(gh->grid.domain.hi.data(), gh->grid.dim());
  } else if (const auto* gd = std::get_if<GridDensity>(&in.measure)) {
    grow(gd->grid.domain.lo.data(), gd->grid.dim());
    grow(gd->grid.domain.hi.data(), gd->grid.dim());
  } else {
    throw ParseError("auto domain requires discretized inputs");
  }
}

RegularGrid grid_from(const io::KeyValues& kv, const std::vector<InputMeasure>& inputs) {
  std::array<std::size_t, 3> shape{1, 1, 1};
  const auto parts = [&] {
    std::vector<long> out;
    std::string tok;
    for (char c : kv.get("grid", "64,64") + ",") {
      if (c == ',') {
        if (!tok.empty()) out.push_back(std::stol(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
    return out;
  }();
  const int d = static_cast<int>(parts.size());
  if (d != 2 && d != 3) throw ParseError("grid must have 2 or 3 axes");
  for (int a = 0; a < d; ++a) {
    if (parts[a] <= 0) throw ParseError("grid axes must be positive");
    shape[a] = static_cast<std::size_t>(parts[a]);
  }

  const std::string dom = kv.get("domain", "auto");
  std::array<double, 3> lo{}, hi{};
  if (dom == "auto") {
    int ddata = 0;
    std::vector<double> blo, bhi;
    for (const auto& in : inputs) grow_box(in, ddata, blo, bhi);
    if (ddata != d) throw ParseError("grid dimension does not match the inputs");
    const double margin = kv.get_double("margin", 0.25);
    for (int a = 0; a < d; ++a) {
      double extent = bhi[a] - blo[a];
      const double pad = extent > 0.0 ? margin * extent : 1.0;
      lo[a] = blo[a] - pad;
      hi[a] = bhi[a] + pad;
    }
  } else {
    std::istringstream in(dom);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(in, tok, ',')) vals.push_back(std::stod(tok));
    if (static_cast<int>(vals.size()) != 2 * d)
      throw ParseError("domain must list lo,hi per grid axis");
    for (int a = 0; a < d; ++a) {
      lo[a] = vals[2 * a];
      hi[a] = vals[2 * a + 1];
    }
  }
  return RegularGrid(BoxDomain(d, lo, hi), shape);
}

int cmd_barycenter(const std::string& config_path, const std::vector<std::string>& overrides,
                   bool dump) {
  io::KeyValues kv = load_config(barycenter_defaults(), config_path, overrides);
  if (dump) {
    dump_config(kv);
    return 0;
  }
  set_threads(kv);

  std::vector<NamedInput> named = collect_inputs(kv);
  normalize_weights(named);
  RunOptions opts = run_options_from(kv);

  std::vector<InputMeasure> inputs;
  for (std::size_t i = 0; i < named.size(); ++i) {
    InputMeasure in = io::ingest(named[i].path, named[i].kind, named[i].weight);
    // Gaussians are discretized up front so the auto domain can see them
    if (const auto* g = std::get_if<GaussianMeasure>(&in.measure))
      in.measure = sample_gaussian_atoms(*g, opts.gaussian_atoms, opts.seed, i);
    inputs.push_back(std::move(in));
  }

  const RegularGrid grid = grid_from(kv, inputs);
  const Schedule schedule = schedule_from(kv);

  const auto t0 = std::chrono::steady_clock::now();
  const BarycenterResult result = run_barycenter(inputs, grid, schedule, opts);
  const double total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  io::write_density_grid(kv.get("out_density", "barycenter_density.txt"), result.density);
  io::write_trace_csv(kv.get("out_trace", "trace.csv"), result.trace, inputs.size(),
                      kv.get_long("trace_wall_ms", 0) != 0);
  std::ofstream summary(kv.get("out_summary", "summary.txt"));
  summary << "best_k=" << result.best_k << "\n"
          << "best_objective=" << io::format_double(result.best_objective) << "\n"
          << "iterations=" << result.trace.rows.size() << "\n"
          << "grid=" << kv.get("grid", "") << "\n"
          << "total_wall_ms=" << io::format_double(total_ms) << "\n";
  std::cout << "best_k=" << result.best_k
            << " best_objective=" << io::format_double(result.best_objective) << "\n";
  return 0;
}

int cmd_gaussian(const std::string& config_path, const std::vector<std::string>& overrides,
                 bool dump) {
  io::KeyValues kv = load_config(gaussian_defaults(), config_path, overrides);
  if (dump) {
    dump_config(kv);
    return 0;
  }
  std::vector<NamedInput> named = collect_inputs(kv);
  normalize_weights(named);

  std::vector<SpdMatrix> sigmas;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  for (const auto& in : named) {
    const GaussianMeasure g = io::read_gaussian_txt(in.path);
    try {
      sigmas.emplace_back(g.dim, g.cov);
    } catch (const std::invalid_argument& e) {
      throw ParseError(in.path + ": " + e.what());
    }
    means.push_back(g.mean);
    weights.push_back(in.weight);
  }
  for (std::size_t i = 1; i < sigmas.size(); ++i)
    if (sigmas[i].dim() != sigmas[0].dim()) throw ParseError("dimension mismatch");

  const Schedule schedule = schedule_from(kv);
  std::vector<double> etas(static_cast<std::size_t>(schedule.T) + 1);
  for (int k = 0; k <= schedule.T; ++k) etas[static_cast<std::size_t>(k)] = schedule.eta(k);

  const GaussianRunResult result = run_gaussian_barycenter(sigmas, weights, etas);

  io::write_matrix_txt(kv.get("out_cov", "barycenter_cov.txt"), result.covariance.dim(),
                       result.covariance.data());
  std::ofstream trace(kv.get("out_trace", "bw_trace.csv"));
  trace << "k,bw_distance\n";
  for (std::size_t k = 0; k < result.bw_trace.size(); ++k)
    trace << k << "," << io::format_double(result.bw_trace[k]) << "\n";

  const int d = sigmas[0].dim();
  std::cout << "final_bw_distance=" << io::format_double(result.bw_trace.back()) << "\nmean=";
  for (int a = 0; a < d; ++a) {
    double ma = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) ma += weights[i] * means[i][a];
    std::cout << (a ? " " : "") << io::format_double(ma);
  }
  std::cout << "\n";
  return 0;
}

int cmd_sample(const std::string& density_path, long n, long seed, const std::string& out) {
  const GridDensity rho = io::read_density_grid(density_path);
  const SampleSet s =
      rejection_sample(rho, static_cast<std::size_t>(n), static_cast<std::uint64_t>(seed));
  io::write_samples_csv(out, s);
  return 0;
}

DiscreteMeasure source_atoms(const std::string& path, const std::string& kind,
                             std::size_t gaussian_atoms, std::uint64_t seed) {
  InputMeasure in = io::ingest(path, kind, 1.0);
  if (const auto* dm = std::get_if<DiscreteMeasure>(&in.measure)) return *dm;
  if (const auto* gh = std::get_if<GridHistogram>(&in.measure)) return gh->as_discrete(1e-15);
  if (const auto* gd = std::get_if<GridDensity>(&in.measure))
    return GridHistogram(gd->grid, gd->cell_masses()).as_discrete(1e-15);
  const auto& g = std::get<GaussianMeasure>(in.measure);
  return sample_gaussian_atoms(g, gaussian_atoms, seed, 0);
}

int cmd_ot(const std::string& source, const std::string& source_kind, const std::string& target,
           const std::string& target_kind, double tol_grad, long max_iters, long seed) {
  const DiscreteMeasure src = source_atoms(source, source_kind, 2000,
                                           static_cast<std::uint64_t>(seed));
  if (target_kind == "density_grid") {
    const GridDensity nu = io::read_density_grid(target);
    src.validate_inside(nu.grid.domain);
    SolverOptions opts;
    opts.tol_grad = tol_grad;
    opts.max_iters = static_cast<int>(max_iters);
    const SemiDiscreteSolution sol = solve_semidiscrete(src, nu, opts);
    std::cout << "w2_squared=" << io::format_double(transport_cost_estimate(sol)) << "\n"
              << "residual=" << io::format_double(sol.grad_norm) << "\n"
              << "status=" << to_string(sol.status) << "\n"
              << "iterations=" << sol.iterations << "\n";
    return 0;
  }
  const DiscreteMeasure dst = source_atoms(target, target_kind, 2000,
                                           static_cast<std::uint64_t>(seed) + 1);
  auto [plan, duals] = solve_discrete(src, dst);
  const double residual = std::abs(plan.cost - duals.dual_value) / (1.0 + std::abs(plan.cost));
  std::cout << "w2_squared=" << io::format_double(2.0 * plan.cost) << "\n"
            << "residual=" << io::format_double(residual) << "\n"
            << "plan_entries=" << plan.entries.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein barycenter solver (mirror descent over grid densities)"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool dump = false;

  auto* bary = app.add_subcommand("barycenter", "compute a barycenter density");
  bary->add_option("--config", config_path, "key=value config file");
  bary->add_option("--set", overrides, "override config entries (key=value)");
  bary->add_flag("--dump-config", dump, "print the effective config and exit");

  auto* gauss = app.add_subcommand("gaussian", "closed-form Gaussian barycenter track");
  gauss->add_option("--config", config_path, "key=value config file");
  gauss->add_option("--set", overrides, "override config entries (key=value)");
  gauss->add_flag("--dump-config", dump, "print the effective config and exit");

  std::string density_path, out_path;
  long n_samples = 0, seed = 0;
  auto* sample = app.add_subcommand("sample", "draw samples from a density file");
  sample->add_option("--density", density_path, "density grid file")->required();
  sample->add_option("--n", n_samples, "sample count")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "rng seed");
  sample->add_option("--out", out_path, "output CSV")->required();

  std::string src, src_kind, dst, dst_kind;
  double tol_grad = 1e-6;
  long max_iters = 500;
  auto* ot = app.add_subcommand("ot", "single transport solve between two measures");
  ot->add_option("--source", src, "source measure path")->required();
  ot->add_option("--source-kind", src_kind, "source kind")->required();
  ot->add_option("--target", dst, "target measure path")->required();
  ot->add_option("--target-kind", dst_kind, "target kind")->required();
  ot->add_option("--tol-grad", tol_grad, "semi-discrete gradient tolerance");
  ot->add_option("--max-iters", max_iters, "semi-discrete iteration cap");
  ot->add_option("--seed", seed, "seed for sampled inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (bary->parsed()) return cmd_barycenter(config_path, overrides, dump);
    if (gauss->parsed()) return cmd_gaussian(config_path, overrides, dump);
    if (sample->parsed()) return cmd_sample(density_path, n_samples, seed, out_path);
    if (ot->parsed()) return cmd_ot(src, src_kind, dst, dst_kind, tol_grad, max_iters, seed);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvariantError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
