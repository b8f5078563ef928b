#include "wbary/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "wbary/errors.hpp"

namespace wbary::io {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) fail(path, line, "invalid number '" + s + "'");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (...) {
    fail(path, line, "invalid number '" + s + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

DiscreteMeasure read_pointcloud_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const std::string header = trim(line);
  int dim = 0;
  bool weighted = false;
  if (header == "x,y") {
    dim = 2;
  } else if (header == "x,y,w") {
    dim = 2;
    weighted = true;
  } else if (header == "x,y,z") {
    dim = 3;
  } else if (header == "x,y,z,w") {
    dim = 3;
    weighted = true;
  } else {
    fail(path, 1, "expected header x,y[,z][,w], got '" + header + "'");
  }
  const std::size_t fields = static_cast<std::size_t>(dim) + (weighted ? 1 : 0);
  std::vector<double> pts;
  std::vector<double> w;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto parts = split(t, ',');
    if (parts.size() != fields)
      fail(path, lineno, "expected " + std::to_string(fields) + " fields, got " +
                             std::to_string(parts.size()));
    for (int a = 0; a < dim; ++a) pts.push_back(parse_double(trim(parts[a]), path, lineno));
    if (weighted) {
      const double wi = parse_double(trim(parts[dim]), path, lineno);
      if (wi < 0.0) fail(path, lineno, "negative weight");
      w.push_back(wi);
    }
  }
  const std::size_t m = pts.size() / static_cast<std::size_t>(dim);
  if (m == 0) throw ParseError(path + ": no atoms");
  if (!weighted) {
    w.assign(m, 1.0 / static_cast<double>(m));
  } else {
    double s = 0.0;
    for (double x : w) s += x;
    if (s <= 0.0) throw ParseError(path + ": zero-mass input");
    if (std::abs(s - 1.0) > 1e-13)
      for (double& x : w) x /= s;
  }
  return DiscreteMeasure(dim, std::move(pts), std::move(w));
}

void write_pointcloud_csv(const std::string& path, const DiscreteMeasure& m,
                          bool with_weights) {
  std::ofstream out = open_output(path);
  out << (m.dim == 2 ? "x,y" : "x,y,z") << (with_weights ? ",w" : "") << "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (int a = 0; a < m.dim; ++a) out << (a ? "," : "") << format_double(m.point(i)[a]);
    if (with_weights) out << "," << format_double(m.weights[i]);
    out << "\n";
  }
}

void write_samples_csv(const std::string& path, const SampleSet& s) {
  std::ofstream out = open_output(path);
  out << (s.dim == 2 ? "x,y" : "x,y,z") << "\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int a = 0; a < s.dim; ++a) out << (a ? "," : "") << format_double(s.point(i)[a]);
    out << "\n";
  }
}

namespace {

struct GridFileData {
  std::string kind;
  RegularGrid grid;
  std::vector<double> values;
};

GridFileData read_grid_file(const std::string& path, const std::string& expect_kind) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const std::string kind_line = trim(line);
  if (kind_line.rfind("kind=", 0) != 0) fail(path, 1, "expected kind=density|histogram");
  GridFileData data;
  data.kind = kind_line.substr(5);
  if (data.kind != expect_kind)
    fail(path, 1, "expected kind=" + expect_kind + ", got kind=" + data.kind);

  if (!std::getline(in, line)) fail(path, 2, "missing grid shape line");
  std::istringstream shape_in(line);
  int d = 0;
  shape_in >> d;
  if (d != 2 && d != 3) fail(path, 2, "dimension must be 2 or 3");
  std::array<std::size_t, 3> shape{1, 1, 1};
  for (int a = 0; a < d; ++a) {
    long n = 0;
    if (!(shape_in >> n) || n <= 0) fail(path, 2, "invalid grid shape");
    shape[a] = static_cast<std::size_t>(n);
  }

  if (!std::getline(in, line)) fail(path, 3, "missing domain bounds line");
  std::istringstream dom_in(line);
  std::array<double, 3> lo{}, hi{};
  for (int a = 0; a < d; ++a) {
    if (!(dom_in >> lo[a] >> hi[a]) || !(lo[a] < hi[a])) fail(path, 3, "invalid domain bounds");
  }
  data.grid = RegularGrid(BoxDomain(d, lo, hi), shape);

  const std::size_t M = data.grid.size();
  data.values.reserve(M);
  double v = 0.0;
  while (in >> v) data.values.push_back(v);
  if (data.values.size() != M)
    throw ParseError(path + ": expected " + std::to_string(M) + " values, got " +
                     std::to_string(data.values.size()));
  return data;
}

void write_grid_file(const std::string& path, const std::string& kind,
                     const RegularGrid& grid, const std::vector<double>& values) {
  std::ofstream out = open_output(path);
  const int d = grid.dim();
  out << "kind=" << kind << "\n" << d;
  for (int a = 0; a < d; ++a) out << " " << grid.shape[a];
  out << "\n";
  for (int a = 0; a < d; ++a)
    out << (a ? " " : "") << format_double(grid.domain.lo[a]) << " "
        << format_double(grid.domain.hi[a]);
  out << "\n";
  const std::size_t per_line = grid.shape[d - 1];
  for (std::size_t j = 0; j < values.size(); ++j) {
    out << format_double(values[j]);
    out << ((j + 1) % per_line == 0 ? "\n" : " ");
  }
}

}  // namespace

GridDensity read_density_grid(const std::string& path) {
  GridFileData data = read_grid_file(path, "density");
  return GridDensity(data.grid, std::move(data.values));
}

GridHistogram read_histogram_grid(const std::string& path) {
  GridFileData data = read_grid_file(path, "histogram");
  return GridHistogram(data.grid, std::move(data.values));
}

void write_density_grid(const std::string& path, const GridDensity& g) {
  write_grid_file(path, "density", g.grid, g.log_values);
}

void write_histogram_grid(const std::string& path, const GridHistogram& g) {
  write_grid_file(path, "histogram", g.grid, g.weights);
}

GaussianMeasure read_gaussian_txt(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::istringstream mean_in(line);
  std::vector<double> mean;
  double v = 0.0;
  while (mean_in >> v) mean.push_back(v);
  const std::size_t d = mean.size();
  if (d == 0) fail(path, 1, "empty mean line");
  std::vector<double> cov;
  cov.reserve(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    if (!std::getline(in, line)) fail(path, 2 + r, "missing covariance row");
    std::istringstream row_in(line);
    std::size_t got = 0;
    while (row_in >> v) {
      cov.push_back(v);
      ++got;
    }
    if (got != d) fail(path, 2 + r, "covariance row must have " + std::to_string(d) + " values");
  }
  try {
    return GaussianMeasure(std::move(mean), std::move(cov));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_gaussian_txt(const std::string& path, const GaussianMeasure& g) {
  std::ofstream out = open_output(path);
  for (int a = 0; a < g.dim; ++a) out << (a ? " " : "") << format_double(g.mean[a]);
  out << "\n";
  for (int r = 0; r < g.dim; ++r) {
    for (int c = 0; c < g.dim; ++c)
      out << (c ? " " : "") << format_double(g.cov[r * g.dim + c]);
    out << "\n";
  }
}

void write_matrix_txt(const std::string& path, int d, const std::vector<double>& a) {
  std::ofstream out = open_output(path);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) out << (c ? " " : "") << format_double(a[r * d + c]);
    out << "\n";
  }
}

GridHistogram read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open for reading");
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw ParseError(path + ": not a P2/P5 PGM file");

  auto next_token = [&]() -> long {
    // skips whitespace and '#' comment lines
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = 0;
    if (!(in >> v)) throw ParseError(path + ": truncated PGM header");
    return v;
  };

  const long width = next_token();
  const long height = next_token();
  const long maxval = next_token();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw ParseError(path + ": invalid PGM dimensions");

  std::vector<double> pixels(static_cast<std::size_t>(width) * height);
  if (magic == "P2") {
    for (auto& p : pixels) {
      long v = 0;
      if (!(in >> v)) throw ParseError(path + ": truncated P2 data");
      p = static_cast<double>(v);
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(pixels.size() * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw ParseError(path + ": truncated P5 data");
    for (std::size_t i = 0; i < pixels.size(); ++i)
      pixels[i] = bytes == 1 ? buf[i] : 256.0 * buf[2 * i] + buf[2 * i + 1];
  }

  // image rows map onto axis 0 with the bottom row at the domain's low edge
  RegularGrid grid(BoxDomain(2, {0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}),
                   {static_cast<std::size_t>(height), static_cast<std::size_t>(width), 1});
  std::vector<double> w(pixels.size());
  for (long r = 0; r < height; ++r)
    for (long c = 0; c < width; ++c)
      w[static_cast<std::size_t>(height - 1 - r) * width + c] =
          pixels[static_cast<std::size_t>(r) * width + c];
  try {
    return GridHistogram(grid, std::move(w));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
}

InputMeasure ingest(const std::string& path, const std::string& kind, double weight) {
  try {
    if (kind == "pointcloud_csv") return {read_pointcloud_csv(path), weight};
    if (kind == "histogram_grid") return {read_histogram_grid(path), weight};
    if (kind == "density_grid") return {read_density_grid(path), weight};
    if (kind == "gaussian_txt") return {read_gaussian_txt(path), weight};
    if (kind == "pgm_image") return {read_pgm(path), weight};
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
  throw ParseError(path + ": unknown input kind '" + kind + "'");
}

void write_trace_csv(const std::string& path, const RunTrace& trace, std::size_t n_inputs,
                     bool with_wall_ms) {
  std::ofstream out = open_output(path);
  out << "k,eta,objective,kl_step,max_potential,wall_ms";
  for (std::size_t i = 0; i < n_inputs; ++i) out << ",residual_" << i;
  out << "\n";
  for (const auto& row : trace.rows) {
    out << row.k << "," << format_double(row.eta) << "," << format_double(row.objective)
        << "," << format_double(row.kl_step) << "," << format_double(row.max_potential)
        << "," << format_double(with_wall_ms ? row.wall_ms : 0.0);
    for (double r : row.inner_residuals) out << "," << format_double(r);
    out << "\n";
  }
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  return parse_double(it->second, "config key " + key, 0);
}

long KeyValues::get_long(const std::string& key, long fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (...) {
    throw ParseError("config key " + key + ": invalid integer '" + it->second + "'");
  }
}

KeyValues read_config(const std::string& path) {
  std::ifstream in = open_input(path);
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail(path, lineno, "expected key=value");
    kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

void apply_override(KeyValues& kv, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ParseError("override '" + assignment + "': expected key=value");
  kv.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace wbary::io
