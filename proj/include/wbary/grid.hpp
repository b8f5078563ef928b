#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace wbary {

// Axis-aligned box domain in R^d, d in {2,3}.
struct BoxDomain {
  int dim = 0;
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};

  BoxDomain() = default;
  BoxDomain(int d, std::array<double, 3> lo_, std::array<double, 3> hi_);

  double volume() const;
  // max Euclidean norm over the 2^d corners
  double radius() const;
  bool contains(const double* p) const;
};

inline double domain_radius(const BoxDomain& b) { return b.radius(); }

// Regular grid of cell centers over a box domain. Node j has multi-index
// (i_1,...,i_d) with the last axis varying fastest (row-major).
struct RegularGrid {
  BoxDomain domain;
  std::array<std::size_t, 3> shape{};

  RegularGrid() = default;
  RegularGrid(BoxDomain dom, std::array<std::size_t, 3> shape_);

  int dim() const { return domain.dim; }
  std::size_t size() const;                 // M = prod shape
  double cell_volume() const;               // Delta
  double axis_step(int a) const;
  void node_center(std::size_t j, double* out) const;
  std::size_t node_of_multi(const std::size_t* idx) const;
  // nearest cell index for a point inside the domain (clamped per axis)
  std::size_t cell_of_point(const double* p) const;

  // Materialized node coordinates, axis-separated (SoA): out[a][j].
  std::vector<std::vector<double>> node_table() const;

  bool same_layout(const RegularGrid& o) const;
};

}  // namespace wbary
