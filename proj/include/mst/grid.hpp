#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mst/types.hpp"

namespace mst {

// Uniform tensor grid on a box. Node (i,j,k) sits at origin + (i*dx, j*dy, k*dz);
// linear index is x-fastest.
struct Grid3 {
  std::array<double, 3> origin{0, 0, 0};
  std::array<double, 3> spacing{1, 1, 1};
  std::array<std::size_t, 3> dims{2, 2, 2};

  Grid3() = default;
  Grid3(std::array<double, 3> o, std::array<double, 3> d, std::array<std::size_t, 3> n)
      : origin(o), spacing(d), dims(n) {
    for (int a = 0; a < 3; ++a) {
      if (!(spacing[a] > 0.0)) throw std::invalid_argument("Grid3: spacing must be positive");
      if (dims[a] < 2) throw std::invalid_argument("Grid3: dims must be >= 2 on every axis");
    }
  }

  std::size_t size() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (k * dims[1] + j) * dims[0] + i;
  }
  Vec3 node(std::size_t i, std::size_t j, std::size_t k) const {
    return {origin[0] + double(i) * spacing[0], origin[1] + double(j) * spacing[1],
            origin[2] + double(k) * spacing[2]};
  }
  double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }
  double max_spacing() const { return std::max(spacing[0], std::max(spacing[1], spacing[2])); }
  Vec3 box_min() const { return {origin[0], origin[1], origin[2]}; }
  Vec3 box_max() const {
    return {origin[0] + double(dims[0] - 1) * spacing[0],
            origin[1] + double(dims[1] - 1) * spacing[1],
            origin[2] + double(dims[2] - 1) * spacing[2]};
  }
  Vec3 center() const { return 0.5 * (box_min() + box_max()); }
  std::array<double, 3> extent() const {
    return {double(dims[0] - 1) * spacing[0], double(dims[1] - 1) * spacing[1],
            double(dims[2] - 1) * spacing[2]};
  }

  bool same_layout(const Grid3& o, double tol = 1e-12) const {
    for (int a = 0; a < 3; ++a)
      if (dims[a] != o.dims[a] || std::abs(spacing[a] - o.spacing[a]) > tol ||
          std::abs(origin[a] - o.origin[a]) > tol)
        return false;
    return true;
  }

  // Node layout symmetric about the plane x3 = 0: odd node count in x3 with a node
  // layer exactly on the plane, so x -> (x1,x2,-x3) maps nodes to nodes.
  bool mirror_ready(double tol = 1e-10) const {
    if (dims[2] % 2 == 0) return false;
    double zmid = origin[2] + 0.5 * double(dims[2] - 1) * spacing[2];
    return std::abs(zmid) <= tol * spacing[2];
  }
  std::size_t plane_k() const { return (dims[2] - 1) / 2; }

  // Lower half (x3 <= 0) of a mirror-ready grid.
  Grid3 half_grid() const {
    if (!mirror_ready()) throw std::invalid_argument("Grid3: half_grid needs a mirror-ready grid");
    return Grid3(origin, spacing, {dims[0], dims[1], plane_k() + 1});
  }

  // True if this grid is the x3 <= 0 half of `full`.
  bool is_half_of(const Grid3& full, double tol = 1e-12) const {
    if (!full.mirror_ready()) return false;
    Grid3 h = full.half_grid();
    return same_layout(h, tol);
  }
};

// Cube grid centered at c with side 2*half_extent, n nodes per axis (n odd gives a
// mirror-ready grid when c.z == 0).
inline Grid3 make_cube_grid(Vec3 c, double half_extent, std::size_t n) {
  double d = 2.0 * half_extent / double(n - 1);
  return Grid3({c.x - half_extent, c.y - half_extent, c.z - half_extent}, {d, d, d}, {n, n, n});
}

struct SupportBall {
  Vec3 center{};
  double radius = 0.0;
};

}  // namespace mst
