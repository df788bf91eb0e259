#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mst/grid.hpp"
#include "mst/types.hpp"

namespace mst {

struct ScalarField {
  Grid3 grid;
  std::vector<cplx> v;
  std::optional<SupportBall> support;

  ScalarField() = default;
  explicit ScalarField(const Grid3& g) : grid(g), v(g.size(), cplx(0.0)) {}

  cplx& at(std::size_t i, std::size_t j, std::size_t k) { return v[grid.index(i, j, k)]; }
  cplx at(std::size_t i, std::size_t j, std::size_t k) const { return v[grid.index(i, j, k)]; }
};

struct VectorField {
  Grid3 grid;
  std::array<std::vector<cplx>, 3> v;
  std::optional<SupportBall> support;

  VectorField() = default;
  explicit VectorField(const Grid3& g) : grid(g) {
    for (auto& c : v) c.assign(g.size(), cplx(0.0));
  }

  CVec3 at(std::size_t i, std::size_t j, std::size_t k) const {
    std::size_t n = grid.index(i, j, k);
    return {v[0][n], v[1][n], v[2][n]};
  }
  ScalarField component(int c) const {
    ScalarField f(grid);
    f.v = v[c];
    f.support = support;
    return f;
  }
};

// ---- flat-vector helpers (fixed-order reductions throughout) ----

inline double l2_norm(const std::vector<cplx>& a, double cell_volume) {
  double s = 0.0;
  for (const cplx& z : a) s += std::norm(z);
  return std::sqrt(s * cell_volume);
}
inline double linf_norm(const std::vector<cplx>& a) {
  double m = 0.0;
  for (const cplx& z : a) m = std::max(m, std::abs(z));
  return m;
}
inline cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b, double cell_volume) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s * cell_volume;
}

inline double l2_norm(const ScalarField& f) { return l2_norm(f.v, f.grid.cell_volume()); }
inline double linf_norm(const ScalarField& f) { return linf_norm(f.v); }
inline double l2_norm(const VectorField& f) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (const cplx& z : f.v[c]) s += std::norm(z);
  return std::sqrt(s * f.grid.cell_volume());
}
inline double linf_norm(const VectorField& f) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) m = std::max(m, linf_norm(f.v[c]));
  return m;
}

inline double rel_l2_error(const ScalarField& a, const ScalarField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    num += std::norm(a.v[i] - b.v[i]);
    den += std::norm(b.v[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}
inline double rel_l2_error(const VectorField& a, const VectorField& b) {
  double num = 0.0, den = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.v[c].size(); ++i) {
      num += std::norm(a.v[c][i] - b.v[c][i]);
      den += std::norm(b.v[c][i]);
    }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

template <typename F>
inline ScalarField sample_scalar(const Grid3& g, F f) {
  ScalarField out(g);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) out.at(i, j, k) = f(g.node(i, j, k));
  return out;
}
template <typename F>
inline VectorField sample_vector(const Grid3& g, F f) {
  VectorField out(g);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        CVec3 w = f(g.node(i, j, k));
        std::size_t n = g.index(i, j, k);
        out.v[0][n] = w.x;
        out.v[1][n] = w.y;
        out.v[2][n] = w.z;
      }
  return out;
}

}  // namespace mst
