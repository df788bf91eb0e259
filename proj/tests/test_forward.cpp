#include <doctest.h>

#include <random>

#include "mst/fft.hpp"
#include "mst/fields.hpp"
#include "mst/forward.hpp"
#include "mst/numerics.hpp"

using namespace mst;

namespace {

double poly_bump(Vec3 p, Vec3 c, double R) {
  Vec3 d = p - c;
  double u = dot(d, d) / (R * R);
  if (u >= 1.0) return 0.0;
  double w = 1.0 - u;
  double w3 = w * w * w;
  return w3 * w3;  // (1-u)^6, C^5 with exact compact support
}

// Scenario with smooth potentials supported strictly below the plane.
Scenario smooth_scenario(std::size_t n, double half_extent, double k) {
  Scenario s = make_empty_scenario(k, n, half_extent, 0.7 * half_extent);
  const Grid3& h = s.grid();
  double R = 0.28 * half_extent;
  Vec3 cA{0.05, -0.05, -0.38 * half_extent};
  Vec3 cq{-0.08, 0.04, -0.36 * half_extent};
  s.A = sample_vector(h, [&](Vec3 p) {
    double b = poly_bump(p, cA, R);
    return CVec3{0.4 * b, 0.3 * b, 0.35 * poly_bump(p, {0.0, 0.1, -0.4 * half_extent}, R)};
  });
  s.q = sample_scalar(h, [&](Vec3 p) { return cplx(0.5, -0.2) * poly_bump(p, cq, R); });
  s.A.support = SupportBall{{0, 0, 0}, s.ball.radius};
  s.q.support = s.A.support;
  return s;
}

ForwardSolver whole_space_solver(const Scenario& s, double source_radius) {
  ExtendedPotentials ext = extend_potentials(s);
  return ForwardSolver(std::move(ext.A), std::move(ext.q), s.k, s.ball, source_radius);
}

}  // namespace

TEST_CASE("solve_freespace: zero potentials reduce to the resolvent bit-for-bit") {
  Scenario s = make_empty_scenario(2.0, 49, 1.2, 0.5);
  ForwardSolver fs = whole_space_solver(s, 0.6);
  Grid3 full = fs.grid();
  ScalarField f = make_gaussian_bump(full, {0.1, 0, -0.1}, 0.1, cplx(1.0, 0.3), 0.4);
  f.support = SupportBall{{0, 0, 0}, 0.6};
  ForwardSolution sol = fs.solve_freespace(f, 1e-6);
  ScalarField direct = fs.kernel().apply(f);
  for (std::size_t n = 0; n < full.size(); ++n) CHECK(sol.u.v[n] == direct.v[n]);
  CHECK(sol.report.converged);
  CHECK(sol.report.relative_residual == 0.0);
}

TEST_CASE("solve_freespace: f = 0 gives u = 0 (uniqueness)") {
  Scenario s = smooth_scenario(41, 1.2, 1.5);
  ForwardSolver fs = whole_space_solver(s, 0.9);
  ScalarField f(fs.grid());
  f.support = SupportBall{{0, 0, 0}, 0.2};
  ForwardSolution sol = fs.solve_freespace(f, 1e-6);
  CHECK(linf_norm(sol.u) == 0.0);
}

TEST_CASE("solve_freespace: manufactured solution oracle") {
  Scenario s = smooth_scenario(49, 1.2, 1.5);
  ForwardSolver fs = whole_space_solver(s, 1.0);
  const Grid3& full = fs.grid();

  // u* = G0 * g with a compact smooth g; f := (L - k^2) u* assembled from the
  // kernel identity: (-Delta - k^2) u* = g, so f = g - W u* with analytic pieces.
  ScalarField g = make_gaussian_bump(full, {0.1, -0.05, 0.0}, 0.15, cplx(1.0, -0.4), 0.55);
  g.support = SupportBall{{0, 0, 0}, 0.8};
  auto ustar = fs.kernel().apply_with_grad(g);

  ExtendedPotentials ext = extend_potentials(s);
  ScalarField divA = divergence_fd(ext.A);
  ScalarField f(full);
  const cplx I(0, 1);
  for (std::size_t n = 0; n < full.size(); ++n) {
    cplx a2 = ext.A.v[0][n] * ext.A.v[0][n] + ext.A.v[1][n] * ext.A.v[1][n] +
              ext.A.v[2][n] * ext.A.v[2][n];
    cplx p = -I * divA.v[n] + a2 + ext.q.v[n];
    cplx adotgrad = ext.A.v[0][n] * ustar.grad.v[0][n] + ext.A.v[1][n] * ustar.grad.v[1][n] +
                    ext.A.v[2][n] * ustar.grad.v[2][n];
    f.v[n] = g.v[n] - 2.0 * I * adotgrad + p * ustar.u.v[n];
  }
  f.support = SupportBall{{0, 0, 0}, 1.0};

  ForwardSolution sol = fs.solve_freespace(f, 1e-8);
  CHECK(sol.report.converged);
  CHECK(rel_l2_error(sol.u, ustar.u) < 1e-3);
}

TEST_CASE("solve_freespace: linearity and two-initialization agreement") {
  Scenario s = smooth_scenario(41, 1.2, 1.3);
  ForwardSolver fs = whole_space_solver(s, 0.9);
  const Grid3& full = fs.grid();
  double tol = 1e-7;

  ScalarField f1 = make_gaussian_bump(full, {0.15, 0.0, 0.1}, 0.12, cplx(1, 0), 0.45);
  ScalarField f2 = make_gaussian_bump(full, {-0.1, 0.1, -0.15}, 0.14, cplx(0, 1), 0.45);
  f1.support = SupportBall{{0, 0, 0}, 0.65};
  f2.support = f1.support;
  cplx alpha(0.7, -0.3), beta(-1.1, 0.4);
  ScalarField fc(full);
  for (std::size_t n = 0; n < full.size(); ++n) fc.v[n] = alpha * f1.v[n] + beta * f2.v[n];
  fc.support = f1.support;

  ForwardSolution s1 = fs.solve_freespace(f1, tol);
  ForwardSolution s2 = fs.solve_freespace(f2, tol);
  ForwardSolution sc = fs.solve_freespace(fc, tol);
  double num = 0, den = 0;
  for (std::size_t n = 0; n < full.size(); ++n) {
    num += std::norm(sc.u.v[n] - alpha * s1.u.v[n] - beta * s2.u.v[n]);
    den += std::norm(sc.u.v[n]);
  }
  CHECK(std::sqrt(num / den) < 100.0 * tol);

  // uniqueness surrogate: random initial guess converges to the same solution
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  ExtendedPotentials ext = extend_potentials(s);
  ForwardSolver fs2(std::move(ext.A), std::move(ext.q), s.k, s.ball, 0.9);
  // warm start through the public interface: rerun with an initial vector
  std::vector<cplx> init;
  {
    // size of the window equals the solver's internal support window; reproduce it
    double r = s.ball.radius + 1.5 * full.max_spacing();
    std::size_t count = 0;
    for (std::size_t kk = 0; kk < full.dims[2]; ++kk)
      for (std::size_t j = 0; j < full.dims[1]; ++j)
        for (std::size_t i = 0; i < full.dims[0]; ++i)
          if (norm(full.node(i, j, kk)) <= r) ++count;
    init.assign(count, cplx(0));
    for (cplx& z : init) z = 0.1 * cplx(u(rng), u(rng));
  }
  ForwardSolution sa = fs.solve_freespace(f1, tol);
  ForwardSolution sb = fs.solve_freespace(f1, tol, 500, &init);
  CHECK(rel_l2_error(sb.u, sa.u) < 10.0 * tol);
  (void)fs2;
}

TEST_CASE("solve_halfspace_source: zero source, image oracle, parity invariants") {
  Scenario s = make_empty_scenario(2.0, 65, 1.3, 0.5);
  const Grid3& h = s.grid();

  ScalarField zero(h);
  zero.support = SupportBall{{0, 0, -0.4}, 0.1};
  HalfspaceSolution hz = solve_halfspace_source(s, zero, 1e-6);
  CHECK(linf_norm(hz.u) == 0.0);

  // odd bump pair -> u = G0 * (odd extension), restricted; near-zero plane trace
  ScalarField f = make_gaussian_bump(h, {0.1, -0.05, -0.5}, 0.1, cplx(1.0, 0.5), 0.35);
  f.support = SupportBall{{0.1, -0.05, -0.5}, 0.35};
  HalfspaceSolution sol = solve_halfspace_source(s, f, 1e-6);
  CHECK(sol.trace_linf < 1e-6 * linf_norm(sol.u));
  CHECK(sol.oddness_defect < 1e-8);

  // image-source oracle at probe nodes: u(x) = sum_y G0(x,y) fodd(y) h^3 via the
  // mirror decomposition G0(x,y) - G0(x,ytilde)
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> un(-0.9, 0.9);
  const Grid3& full = sol.u_full.grid;
  int checked = 0;
  double worst = 0.0;
  while (checked < 8) {
    Vec3 p{un(rng), un(rng), -std::abs(un(rng)) - 0.05};
    Vec3 csrc{0.1, -0.05, -0.5};
    if (norm(p - csrc) < 0.5) continue;
    std::size_t i = std::size_t(std::round((p.x - h.origin[0]) / h.spacing[0]));
    std::size_t j = std::size_t(std::round((p.y - h.origin[1]) / h.spacing[1]));
    std::size_t kk = std::size_t(std::round((p.z - h.origin[2]) / h.spacing[2]));
    kk = std::min(kk, h.dims[2] - 2);
    Vec3 node = h.node(i, j, kk);
    if (norm(node - csrc) < 0.45 || node.z > -0.04) continue;
    cplx acc = 0.0;
    for (std::size_t c = 0; c < h.size(); ++c) {
      if (f.v[c] == cplx(0.0)) continue;
      std::size_t ci = c % h.dims[0], cj = (c / h.dims[0]) % h.dims[1],
                  ck = c / (h.dims[0] * h.dims[1]);
      Vec3 yq = h.node(ci, cj, ck);
      acc += (green_eval(s.k, node, yq) - green_eval(s.k, node, mirror_z(yq))) * f.v[c];
    }
    acc *= h.cell_volume();
    worst = std::max(worst, std::abs(sol.u.at(i, j, kk) - acc));
    ++checked;
  }
  CHECK(worst < 5e-4 * linf_norm(sol.u));
  (void)full;
}

TEST_CASE("solve_halfspace_source: nonzero A3 on the plane is rejected") {
  Scenario s = make_empty_scenario(1.0, 33, 1.0, 0.5);
  const Grid3& h = s.grid();
  // A3 bump touching the plane: nonzero normal component at x3 = 0
  s.A = sample_vector(h, [&](Vec3 p) {
    return CVec3{0.0, 0.0, 0.5 * poly_bump(p, {0, 0, 0}, 0.35)};
  });
  s.A.support = SupportBall{{0, 0, 0}, 0.5};
  ScalarField f(h);
  f.support = SupportBall{{0, 0, -0.4}, 0.1};
  CHECK_THROWS_WITH_AS(solve_halfspace_source(s, f, 1e-6), doctest::Contains("gauge_fix"),
                       std::invalid_argument);
}

namespace {

// Poisson-kernel (method of images) oracle for the half-space Dirichlet problem:
// u(x) = -2 Int_plane d_{y3} G0(x, (y',0)) f(y') dy'.
cplx dirichlet_oracle(double k, Vec3 x, const BoundaryTrace& f) {
  const Grid3& g = f.grid3;
  cplx acc = 0.0;
  for (std::size_t j = 0; j < g.dims[1]; ++j)
    for (std::size_t i = 0; i < g.dims[0]; ++i) {
      cplx fv = f.values[f.index(i, j)];
      if (fv == cplx(0.0)) continue;
      Vec3 y{g.origin[0] + double(i) * g.spacing[0], g.origin[1] + double(j) * g.spacing[1],
             0.0};
      double r = norm(x - y);
      // d_{y3} G0(x,y)|_{y3=0} = G0 * (ik - 1/r) * (y3 - x3)/r |-> x3/r factor
      cplx dG = green_eval(k, x, y) * (cplx(0, k) - 1.0 / r) * (0.0 - x.z) / r;
      acc += dG * fv;
    }
  return -2.0 * acc * g.spacing[0] * g.spacing[1];
}

}  // namespace

TEST_CASE("solve_halfspace_dirichlet: trace reproduction and image oracle") {
  Scenario s = make_empty_scenario(2.0, 65, 1.3, 0.45);
  s.gamma2 = PlanePatch{-0.55, 0.55, -0.55, 0.55};
  const Grid3& h = s.grid();

  // compactly supported smooth trace inside gamma2 (2D polynomial bump, C^9)
  BoundaryTrace f = make_trace(h, s.gamma2, [](double x, double y) {
    double u = (x * x + y * y) / (0.5 * 0.5);
    if (u >= 1.0) return cplx(0.0);
    double w = 1.0 - u;
    double w5 = w * w;
    w5 = w5 * w5 * w;
    return cplx(1.0, 0.4) * w5 * w5;
  });

  DirichletOptions opt;
  opt.tol = 1e-7;
  opt.lift_width = 1.0;
  HalfspaceSolution sol = solve_halfspace_dirichlet(s, f, opt);

  // trace reproduced on gamma2
  std::size_t kp = h.dims[2] - 1;
  double tnum = 0, tden = 0;
  for (std::size_t j = 0; j < h.dims[1]; ++j)
    for (std::size_t i = 0; i < h.dims[0]; ++i) {
      tnum += std::norm(sol.u.at(i, j, kp) - f.values[f.index(i, j)]);
      tden += std::norm(f.values[f.index(i, j)]);
    }
  CHECK(std::sqrt(tnum / tden) < 1e-3);

  // interior match against the Poisson-kernel oracle on a probe set
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> un(-0.8, 0.8);
  double num = 0, den = 0;
  int checked = 0;
  while (checked < 25) {
    Vec3 p{un(rng), un(rng), -(0.15 + 0.6 * std::abs(un(rng)))};
    std::size_t i = std::size_t(std::round((p.x - h.origin[0]) / h.spacing[0]));
    std::size_t j = std::size_t(std::round((p.y - h.origin[1]) / h.spacing[1]));
    std::size_t kk = std::size_t(std::round((p.z - h.origin[2]) / h.spacing[2]));
    Vec3 node = h.node(i, j, kk);
    if (node.z > -0.12) continue;
    cplx oracle = dirichlet_oracle(s.k, node, f);
    num += std::norm(sol.u.at(i, j, kk) - oracle);
    den += std::norm(oracle);
    ++checked;
  }
  CHECK(std::sqrt(num / den) < 1e-3);

  // residual check with potentials present: (L - k^2) u = 0 away from the lift
  // slab, verified with local 4th-order differences at interior probes; the
  // deeper grid leaves a probe band below a fully resolved lift profile
  Scenario sp = smooth_scenario(97, 1.3, 2.0);
  sp.gamma2 = PlanePatch{-1.05, 1.05, -1.05, 1.05};
  BoundaryTrace fp = make_trace(sp.grid(), sp.gamma2, [](double x, double y) {
    double u = (x * x + y * y) / (0.5 * 0.5);
    if (u >= 1.0) return cplx(0.0);
    double w = 1.0 - u;
    double w5 = w * w;
    w5 = w5 * w5 * w;
    return cplx(1.0, 0.4) * w5 * w5;
  });
  DirichletOptions optp = opt;
  optp.lift_width = 0.65;
  HalfspaceSolution solp = solve_halfspace_dirichlet(sp, fp, optp);
  CHECK(solp.report.converged);
  ExtendedPotentials ext = extend_potentials(sp);
  ScalarField divA = divergence_fd(ext.A);
  const Grid3& full = solp.u_full.grid;
  const ScalarField& uf = solp.u_full;
  auto d4 = [&](std::size_t n, std::size_t stride, double dd) {
    return (-uf.v[n + 2 * stride] + 16.0 * uf.v[n + stride] - 30.0 * uf.v[n] +
            16.0 * uf.v[n - stride] - uf.v[n - 2 * stride]) /
           (12.0 * dd * dd);
  };
  auto g4 = [&](std::size_t n, std::size_t stride, double dd) {
    return (-uf.v[n + 2 * stride] + 8.0 * uf.v[n + stride] - 8.0 * uf.v[n - stride] +
            uf.v[n - 2 * stride]) /
           (12.0 * dd);
  };
  const cplx I(0, 1);
  std::size_t sx = 1, sy = full.dims[0], sz = full.dims[0] * full.dims[1];
  double worst = 0.0, scale = linf_norm(solp.u_full);
  std::size_t kslab = std::size_t((0.65 + 5.0 * full.spacing[2]) / full.spacing[2]);
  for (std::size_t kk = 6; kk < full.plane_k() - kslab; kk += 5)
    for (std::size_t j = 8; j + 8 < full.dims[1]; j += 7)
      for (std::size_t i = 8; i + 8 < full.dims[0]; i += 7) {
        std::size_t n = full.index(i, j, kk);
        cplx lap = d4(n, sx, full.spacing[0]) + d4(n, sy, full.spacing[1]) +
                   d4(n, sz, full.spacing[2]);
        CVec3 gr{g4(n, sx, full.spacing[0]), g4(n, sy, full.spacing[1]),
                 g4(n, sz, full.spacing[2])};
        cplx a2 = ext.A.v[0][n] * ext.A.v[0][n] + ext.A.v[1][n] * ext.A.v[1][n] +
                  ext.A.v[2][n] * ext.A.v[2][n];
        cplx p = -I * divA.v[n] + a2 + ext.q.v[n];
        cplx adotg = ext.A.v[0][n] * gr.x + ext.A.v[1][n] * gr.y + ext.A.v[2][n] * gr.z;
        cplx res = -lap - 2.0 * I * adotg + (p - sp.k * sp.k) * uf.v[n];
        worst = std::max(worst, std::abs(res));
      }
  CHECK(worst < 1e-3 * scale);
}
