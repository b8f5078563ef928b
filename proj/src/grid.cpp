#include "wbary/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace wbary {

BoxDomain::BoxDomain(int d, std::array<double, 3> lo_, std::array<double, 3> hi_)
    : dim(d), lo(lo_), hi(hi_) {
  if (d != 2 && d != 3) throw std::invalid_argument("BoxDomain: dim must be 2 or 3");
  for (int a = 0; a < d; ++a) {
    if (!(lo[a] < hi[a])) throw std::invalid_argument("BoxDomain: lo must be < hi on every axis");
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]))
      throw std::invalid_argument("BoxDomain: non-finite bounds");
  }
}

double BoxDomain::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= hi[a] - lo[a];
  return v;
}

double BoxDomain::radius() const {
  double best = 0.0;
  const int corners = 1 << dim;
  for (int c = 0; c < corners; ++c) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double x = (c >> a) & 1 ? hi[a] : lo[a];
      s += x * x;
    }
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

bool BoxDomain::contains(const double* p) const {
  for (int a = 0; a < dim; ++a)
    if (p[a] < lo[a] || p[a] > hi[a]) return false;
  return true;
}

RegularGrid::RegularGrid(BoxDomain dom, std::array<std::size_t, 3> shape_)
    : domain(dom), shape(shape_) {
  for (int a = 0; a < domain.dim; ++a)
    if (shape[a] == 0) throw std::invalid_argument("RegularGrid: zero cells on an axis");
  for (int a = domain.dim; a < 3; ++a) shape[a] = 1;
}

std::size_t RegularGrid::size() const {
  std::size_t m = 1;
  for (int a = 0; a < domain.dim; ++a) m *= shape[a];
  return m;
}

double RegularGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < domain.dim; ++a) v *= axis_step(a);
  return v;
}

double RegularGrid::axis_step(int a) const {
  return (domain.hi[a] - domain.lo[a]) / static_cast<double>(shape[a]);
}

void RegularGrid::node_center(std::size_t j, double* out) const {
  const int d = domain.dim;
  for (int a = d - 1; a >= 0; --a) {
    const std::size_t ia = j % shape[a];
    j /= shape[a];
    out[a] = domain.lo[a] + (static_cast<double>(ia) + 0.5) * axis_step(a);
  }
}

std::size_t RegularGrid::node_of_multi(const std::size_t* idx) const {
  std::size_t j = 0;
  for (int a = 0; a < domain.dim; ++a) j = j * shape[a] + idx[a];
  return j;
}

std::size_t RegularGrid::cell_of_point(const double* p) const {
  std::size_t idx[3] = {0, 0, 0};
  for (int a = 0; a < domain.dim; ++a) {
    const double t = (p[a] - domain.lo[a]) / axis_step(a);
    long i = static_cast<long>(std::floor(t));
    if (i < 0) i = 0;
    if (i >= static_cast<long>(shape[a])) i = static_cast<long>(shape[a]) - 1;
    idx[a] = static_cast<std::size_t>(i);
  }
  return node_of_multi(idx);
}

std::vector<std::vector<double>> RegularGrid::node_table() const {
  const int d = domain.dim;
  const std::size_t m = size();
  std::vector<std::vector<double>> table(d, std::vector<double>(m));
  double pt[3];
  for (std::size_t j = 0; j < m; ++j) {
    node_center(j, pt);
    for (int a = 0; a < d; ++a) table[a][j] = pt[a];
  }
  return table;
}

bool RegularGrid::same_layout(const RegularGrid& o) const {
  if (domain.dim != o.domain.dim) return false;
  for (int a = 0; a < domain.dim; ++a) {
    if (shape[a] != o.shape[a]) return false;
    if (domain.lo[a] != o.domain.lo[a] || domain.hi[a] != o.domain.hi[a]) return false;
  }
  return true;
}

}  // namespace wbary
