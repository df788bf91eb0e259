#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "mst/field.hpp"
#include "mst/types.hpp"

namespace mst {

// exp(-1/t) continued by 0 for t <= 0; the building block of every cutoff here.
inline double bump_piece(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// C-infinity transition: 0 for t <= 0, 1 for t >= 1, monotone in between.
inline double smooth_step(double t) {
  double a = bump_piece(t), b = bump_piece(1.0 - t);
  return a / (a + b);
}

// 9th-degree C^4 polynomial smoothstep and its first two derivatives. Unlike the
// exp-based step, its variation spreads over the whole transition, so it resolves
// on a grid with ~10 cells per unit.
inline double poly_smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return ((((70.0 * t - 315.0) * t + 540.0) * t - 420.0) * t + 126.0) * t * t * t * t * t;
}
inline double poly_smoothstep_d1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = t * (1.0 - t);
  return 630.0 * a * a * a * a;
}
inline double poly_smoothstep_d2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = t * (1.0 - t);
  return 2520.0 * a * a * a * (1.0 - 2.0 * t);
}

// Unnormalized standard mollifier profile exp(-1/(1-r^2)) on r < 1.
inline double mollifier_profile(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// Radially smoothed indicator: 1 for r <= r0 - delta, 0 for r >= r0 + delta.
inline double smoothed_indicator(double r, double r0, double delta) {
  return smooth_step((r0 + delta - r) / (2.0 * delta));
}

// Least-squares slope of log(y) against log(x); y must be positive.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Least-squares fit m(h) ~ m* + c * h^order; returns the extrapolated limit m*
// and a convergence flag (residual decline along the ladder, checked pairwise).
struct Extrapolation {
  cplx limit{};
  bool converged = true;
  double fit_residual = 0.0;
};
Extrapolation richardson_extrapolate(const std::vector<double>& h, const std::vector<cplx>& m,
                                     double order);

// Catmull-Rom interpolation on uniform grids; zero outside the grid box
// (intended for compactly supported fields).
cplx sample_tricubic(const ScalarField& f, Vec3 p);
CVec3 sample_tricubic(const VectorField& f, Vec3 p);
cplx sample_trilinear(const ScalarField& f, Vec3 p);

// Largest |f(x)-f(y)|/|x-y| over nearest-neighbor grid pairs: the grid-level
// Lipschitz estimate the toolkit reports (it cannot certify the continuum class).
double lipschitz_estimate(const ScalarField& f);
double lipschitz_estimate(const VectorField& f);

}  // namespace mst
