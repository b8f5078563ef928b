#pragma once

#include <map>
#include <string>
#include <vector>

#include "wbary/measures.hpp"
#include "wbary/mirror.hpp"
#include "wbary/sampling.hpp"

namespace wbary::io {

// All text output uses 17 significant digits so write -> read round-trips
// reproduce doubles bit-exactly.
std::string format_double(double v);

// --- point cloud CSV: header "x,y[,z][,w]", one row per atom ---
DiscreteMeasure read_pointcloud_csv(const std::string& path);
void write_pointcloud_csv(const std::string& path, const DiscreteMeasure& m,
                          bool with_weights = true);
void write_samples_csv(const std::string& path, const SampleSet& s);

// --- grid files: "kind=density|histogram", "d n1 .. nd", "lo1 hi1 ..",
// then M values row-major (log-values for densities) ---
GridDensity read_density_grid(const std::string& path);
GridHistogram read_histogram_grid(const std::string& path);
void write_density_grid(const std::string& path, const GridDensity& g);
void write_histogram_grid(const std::string& path, const GridHistogram& g);

// --- Gaussian file: mean line, then d covariance rows ---
GaussianMeasure read_gaussian_txt(const std::string& path);
void write_gaussian_txt(const std::string& path, const GaussianMeasure& g);
void write_matrix_txt(const std::string& path, int d, const std::vector<double>& a);

// --- PGM images (binary P5 or ASCII P2) as histograms on the unit square ---
GridHistogram read_pgm(const std::string& path);

// kind in {pointcloud_csv, histogram_grid, density_grid, gaussian_txt, pgm_image}
InputMeasure ingest(const std::string& path, const std::string& kind, double weight);

// --- trace CSV ---
void write_trace_csv(const std::string& path, const RunTrace& trace, std::size_t n_inputs,
                     bool with_wall_ms);

// --- flat key=value config ---
struct KeyValues {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  void set(const std::string& key, const std::string& value) { values[key] = value; }
};

KeyValues read_config(const std::string& path);
// parses "key=value" (as passed on the command line) into kv
void apply_override(KeyValues& kv, const std::string& assignment);

}  // namespace wbary::io
