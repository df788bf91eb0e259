#include "mst/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace mst {

void Scenario::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("Scenario: k must be positive");
  if (!A.grid.same_layout(q.grid)) throw std::invalid_argument("Scenario: A and q grids differ");
  double top = A.grid.origin[2] + double(A.grid.dims[2] - 1) * A.grid.spacing[2];
  if (std::abs(top) > 1e-10 * A.grid.spacing[2])
    throw std::invalid_argument("Scenario: potentials must live on the x3 <= 0 half grid");
  if (std::abs(ball.center.z) > 1e-12)
    throw std::invalid_argument("Scenario: support ball center must lie on the plane x3 = 0");

  double amax = 0.0;
  for (int c = 0; c < 3; ++c)
    for (const cplx& z : A.v[c]) {
      amax = std::max(amax, std::abs(z));
      if (std::abs(z.imag()) > 1e-12 * std::max(1.0, std::abs(z)))
        throw std::invalid_argument("Scenario: A must be real-valued");
    }
  for (const cplx& z : q.v)
    if (z.imag() > 1e-12 * std::max(1.0, std::abs(z)))
      throw std::invalid_argument("Scenario: Im q <= 0 violated");

  // supp(A), supp(q) inside B.
  const Grid3& g = A.grid;
  for (std::size_t kk = 0; kk < g.dims[2]; ++kk)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        if (norm(g.node(i, j, kk) - ball.center) <= ball.radius) continue;
        std::size_t n = g.index(i, j, kk);
        double mag = std::abs(q.v[n]);
        for (int c = 0; c < 3; ++c) mag = std::max(mag, std::abs(A.v[c][n]));
        if (mag > 1e-12)
          throw std::invalid_argument("Scenario: potentials leak outside the support ball");
      }

  // eq_gamma: each patch must meet the plane outside the closed ball.
  auto patch_ok = [&](const PlanePatch& p) {
    double corners[4][2] = {{p.x0, p.y0}, {p.x0, p.y1}, {p.x1, p.y0}, {p.x1, p.y1}};
    for (auto& c : corners) {
      double dx = c[0] - ball.center.x, dy = c[1] - ball.center.y;
      if (std::sqrt(dx * dx + dy * dy) > ball.radius) return true;
    }
    return false;
  };
  if (!patch_ok(gamma1) || !patch_ok(gamma2))
    throw std::invalid_argument("Scenario: patches must intersect the plane outside the ball");
}

ExtendedPotentials extend_potentials(const Scenario& s) {
  ExtendedPotentials out;
  out.A = reflect_extend(s.A, {Parity::Even, Parity::Even, Parity::Odd});
  out.q = reflect_extend(s.q, Parity::Even);
  return out;
}

Scenario make_empty_scenario(double k, std::size_t n, double half_extent, double ball_radius) {
  if (n % 2 == 0) throw std::invalid_argument("make_empty_scenario: n must be odd");
  Grid3 full = make_cube_grid({0, 0, 0}, half_extent, n);
  Grid3 half = full.half_grid();
  Scenario s;
  s.k = k;
  s.A = VectorField(half);
  s.q = ScalarField(half);
  s.ball = SupportBall{{0, 0, 0}, ball_radius};
  double b = ball_radius, e = half_extent;
  s.gamma2 = PlanePatch{-e, e, -e, e};
  s.gamma1 = PlanePatch{-e, e, -e, e};
  (void)b;
  return s;
}

std::uint64_t scenario_hash(const Scenario& s) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(&s.k, sizeof(s.k));
  mix(s.A.grid.origin.data(), 24);
  mix(s.A.grid.spacing.data(), 24);
  mix(s.A.grid.dims.data(), 24);
  for (int c = 0; c < 3; ++c) mix(s.A.v[c].data(), s.A.v[c].size() * sizeof(cplx));
  mix(s.q.v.data(), s.q.v.size() * sizeof(cplx));
  mix(&s.ball, sizeof(s.ball));
  mix(&s.gamma1, sizeof(s.gamma1));
  mix(&s.gamma2, sizeof(s.gamma2));
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace mst
