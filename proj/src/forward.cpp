#include "mst/forward.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mst/fft.hpp"
#include "mst/fields.hpp"
#include "mst/numerics.hpp"

namespace mst {

ScalarField apply_magnetic_operator(const VectorField& A, const ScalarField& q, double k,
                                    const ScalarField& u, DivMode div_mode) {
  const Grid3& g = u.grid;
  ScalarField lap = laplacian_spectral(u);
  VectorField grad = grad_spectral(u);
  ScalarField divA = div_mode == DivMode::Spectral ? divergence_spectral(A) : divergence_fd(A);
  ScalarField out(g);
  const cplx I(0, 1);
  for (std::size_t n = 0; n < g.size(); ++n) {
    CVec3 a{A.v[0][n], A.v[1][n], A.v[2][n]};
    cplx adotgrad = a.x * grad.v[0][n] + a.y * grad.v[1][n] + a.z * grad.v[2][n];
    cplx a2 = a.x * a.x + a.y * a.y + a.z * a.z;
    cplx p = -I * divA.v[n] + a2 + q.v[n];
    out.v[n] = -lap.v[n] - 2.0 * I * adotgrad + (p - k * k) * u.v[n];
  }
  return out;
}

void write_solve_report_csv(const std::string& path, const SolveReport& rep) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_solve_report_csv: cannot open " + path);
  os << "iteration,residual\n";
  char line[64];
  for (std::size_t i = 0; i < rep.history.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.17g\n", i, rep.history[i]);
    os << line;
  }
}

BoundaryTrace make_trace(const Grid3& g, const PlanePatch& patch,
                         const std::function<cplx(double, double)>& f) {
  BoundaryTrace t;
  t.grid3 = g;
  t.values.assign(g.dims[0] * g.dims[1], cplx(0.0));
  t.mask.assign(g.dims[0] * g.dims[1], 0);
  for (std::size_t j = 0; j < g.dims[1]; ++j)
    for (std::size_t i = 0; i < g.dims[0]; ++i) {
      double x = g.origin[0] + double(i) * g.spacing[0];
      double y = g.origin[1] + double(j) * g.spacing[1];
      if (!patch.contains(x, y)) continue;
      t.mask[t.index(i, j)] = 1;
      t.values[t.index(i, j)] = f(x, y);
    }
  return t;
}

ForwardSolver::ForwardSolver(VectorField A_ext, ScalarField q_ext, double k, SupportBall ball,
                             double source_radius)
    : A_(std::move(A_ext)), q_(std::move(q_ext)), k_(k), ball_(ball) {
  const Grid3& g = A_.grid;
  if (!q_.grid.same_layout(g)) throw std::invalid_argument("ForwardSolver: grid mismatch");
  ScalarField divA = divergence_fd(A_);
  p_ = ScalarField(g);
  const cplx I(0, 1);
  for (std::size_t n = 0; n < g.size(); ++n) {
    cplx a2 = A_.v[0][n] * A_.v[0][n] + A_.v[1][n] * A_.v[1][n] + A_.v[2][n] * A_.v[2][n];
    p_.v[n] = -I * divA.v[n] + a2 + q_.v[n];
  }
  // nodes where W can act: potential support plus a one-cell halo
  double r = ball.radius + 1.5 * g.max_spacing();
  for (std::size_t kk = 0; kk < g.dims[2]; ++kk)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i)
        if (norm(g.node(i, j, kk) - ball.center) <= r) window_.push_back(g.index(i, j, kk));
  kernel_ = std::make_unique<GreenKernel>(g, k, source_radius);
}

void ForwardSolver::potential_term(const ScalarField& u, const VectorField& grad_u,
                                   std::vector<cplx>& out) const {
  // W u = 2i A . grad u - p u at the window nodes
  const cplx I(0, 1);
  out.resize(window_.size());
  for (std::size_t w = 0; w < window_.size(); ++w) {
    std::size_t n = window_[w];
    cplx adotgrad =
        A_.v[0][n] * grad_u.v[0][n] + A_.v[1][n] * grad_u.v[1][n] + A_.v[2][n] * grad_u.v[2][n];
    out[w] = 2.0 * I * adotgrad - p_.v[n] * u.v[n];
  }
}

ForwardSolution ForwardSolver::solve_freespace(const ScalarField& f, double tol,
                                               std::size_t max_iter,
                                               const std::vector<cplx>* initial) const {
  const Grid3& g = A_.grid;
  if (!f.grid.same_layout(g)) throw std::invalid_argument("solve_freespace: grid mismatch");
  double fnorm = 0.0;
  for (const cplx& z : f.v) fnorm += std::norm(z);
  fnorm = std::sqrt(fnorm);

  double pot_mag = linf_norm(A_) + linf_norm(p_);
  ForwardSolution sol;
  if (pot_mag == 0.0 || window_.empty() || fnorm == 0.0) {
    // potential-free reduction: u = G0 * f, identical to resolvent_apply
    auto wg = kernel_->apply_raw_with_grad(f.v);
    sol.u = std::move(wg.u);
    sol.grad_u = std::move(wg.grad);
    sol.source_density = f;
    sol.report.converged = true;
    sol.report.relative_residual = 0.0;
  } else {
    // (I - W G0) w = W(G0 * f) on the window; the full density is g = f + w
    auto uf = kernel_->apply_raw_with_grad(f.v);
    std::vector<cplx> b;
    potential_term(uf.u, uf.grad, b);

    std::vector<cplx> full(g.size());
    auto op = [&](const std::vector<cplx>& w, std::vector<cplx>& out) {
      std::fill(full.begin(), full.end(), cplx(0.0));
      for (std::size_t i = 0; i < window_.size(); ++i) full[window_[i]] = w[i];
      auto wg = kernel_->apply_raw_with_grad(full);
      potential_term(wg.u, wg.grad, out);
      for (std::size_t i = 0; i < window_.size(); ++i) out[i] = w[i] - out[i];
    };

    GmresOptions gopt;
    gopt.abs_tol = tol * fnorm;
    gopt.max_iter = max_iter;
    std::vector<cplx> w;
    if (initial) w = *initial;
    GmresResult res = gmres(op, b, w, gopt);

    std::vector<cplx> gfull = f.v;
    for (std::size_t i = 0; i < window_.size(); ++i) gfull[window_[i]] += w[i];
    auto wg = kernel_->apply_raw_with_grad(gfull);
    sol.u = std::move(wg.u);
    sol.grad_u = std::move(wg.grad);
    sol.source_density = ScalarField(g);
    sol.source_density.v = std::move(gfull);
    sol.report.converged = res.converged;
    sol.report.stagnated = res.stagnated;
    sol.report.iterations = res.iterations;
    sol.report.relative_residual = fnorm > 0 ? res.residual / fnorm : res.residual;
    sol.report.history = std::move(res.history);
    if (res.stagnated)
      throw std::runtime_error("solve_freespace: GMRES stagnated; residual history in report");
  }
  sol.source_density.support = SupportBall{g.center(), kernel_->source_radius()};

  // radiation monitor on a short ladder when the grid has room for it
  Vec3 c = g.center();
  double fit =
      0.5 * std::min({g.extent()[0], g.extent()[1], g.extent()[2]}) - 2.0 * g.max_spacing();
  double r0 = norm(ball_.center - c) + ball_.radius + 2.0 * g.max_spacing();
  if (fit > 1.3 * r0) {
    std::vector<double> radii{r0, r0 + (fit - r0) / 2.0, fit};
    sol.report.radiating_check = radiation_monitor(sol.u, k_, radii, 12, 24);
  }
  return sol;
}

namespace {

double trace_linf(const ScalarField& u_full) {
  const Grid3& g = u_full.grid;
  std::size_t kp = g.plane_k();
  double m = 0.0;
  for (std::size_t j = 0; j < g.dims[1]; ++j)
    for (std::size_t i = 0; i < g.dims[0]; ++i) m = std::max(m, std::abs(u_full.at(i, j, kp)));
  return m;
}

double oddness_defect(const ScalarField& u_full) {
  ScalarField even = parity_part(u_full, Parity::Even);
  double n = linf_norm(u_full);
  return n > 0 ? linf_norm(even) / n : 0.0;
}

void check_gauge_fixed(const Scenario& s) {
  const Grid3& h = s.grid();
  std::size_t ktop = h.dims[2] - 1;
  double m = 0.0, scale = linf_norm(s.A);
  for (std::size_t j = 0; j < h.dims[1]; ++j)
    for (std::size_t i = 0; i < h.dims[0]; ++i)
      m = std::max(m, std::abs(s.A.v[2][h.index(i, j, ktop)]));
  if (m > 1e-10 * std::max(scale, 1e-300))
    throw std::invalid_argument(
        "solve_halfspace: A3 must vanish on the plane; run dnmap gauge_fix first");
}

HalfspaceSolution finish_halfspace(ForwardSolution&& ws) {
  HalfspaceSolution out;
  out.u_full = std::move(ws.u);
  out.grad_u_full = std::move(ws.grad_u);
  out.u = restrict_to_half(out.u_full);
  out.grad_u = restrict_to_half(out.grad_u_full);
  out.trace_linf = trace_linf(out.u_full);
  out.oddness_defect = oddness_defect(out.u_full);
  out.report = std::move(ws.report);
  return out;
}

double potential_source_radius(const Scenario& s) {
  Grid3 full = s.grid();
  full.dims[2] = 2 * full.dims[2] - 1;
  Vec3 c = full.center();
  return norm(s.ball.center - c) + s.ball.radius;
}

}  // namespace

HalfspaceSolution solve_halfspace_source(const Scenario& scenario, const ScalarField& f_half,
                                         double tol, std::size_t max_iter) {
  scenario.validate();
  check_gauge_fixed(scenario);
  if (!f_half.grid.same_layout(scenario.grid()))
    throw std::invalid_argument("solve_halfspace_source: source grid mismatch");
  ExtendedPotentials ext = extend_potentials(scenario);
  ScalarField f_ext = reflect_extend(f_half, Parity::Odd);

  double srcr = potential_source_radius(scenario);
  Vec3 c = f_ext.grid.center();
  if (f_half.support) {
    srcr = std::max(srcr, norm(f_half.support->center - c) + f_half.support->radius);
  } else {
    auto e = f_ext.grid.extent();
    srcr = 0.5 * std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  }
  ForwardSolver fs(std::move(ext.A), std::move(ext.q), scenario.k, scenario.ball, srcr);
  return finish_halfspace(fs.solve_freespace(f_ext, tol, max_iter));
}

namespace {

// chi(z): 9th-degree C^4 smoothstep with chi(0) = 1, chi = 0 for z <= -w. The
// polynomial profile has no sub-grid boundary layers, unlike exp-based bumps
// whose edge structure never resolves on the grid.
struct LiftProfile {
  double w;
  double value(double z) const { return poly_smoothstep((z + w) / w); }
  double d1(double z) const { return poly_smoothstep_d1((z + w) / w) / w; }
  double d2(double z) const { return poly_smoothstep_d2((z + w) / w) / (w * w); }
};

}  // namespace

HalfspaceSolution solve_halfspace_dirichlet(const Scenario& scenario, const BoundaryTrace& f,
                                            const DirichletOptions& opt) {
  scenario.validate();
  check_gauge_fixed(scenario);
  const Grid3& h = scenario.grid();
  if (f.grid3.dims[0] != h.dims[0] || f.grid3.dims[1] != h.dims[1])
    throw std::invalid_argument("solve_halfspace_dirichlet: trace layout mismatch");

  double depth = -h.origin[2];
  double w = opt.lift_width > 0 ? opt.lift_width
                                : std::min(24.0 * h.spacing[2], 0.7 * depth);
  LiftProfile chi{w};

  // transverse derivatives of the trace, 2D spectral (the trace is compact in the patch)
  std::array<std::size_t, 2> d2{h.dims[0], h.dims[1]};
  std::size_t n2 = d2[0] * d2[1];
  CplxBuffer buf(n2);
  for (std::size_t i = 0; i < n2; ++i) buf[i] = f.values[i];
  fft2_forward(d2, buf.data());
  std::vector<cplx> hatf(n2);
  for (std::size_t i = 0; i < n2; ++i) hatf[i] = buf[i];

  auto inverse_with = [&](auto symbol) {
    CplxBuffer work(n2);
    for (std::size_t j = 0; j < d2[1]; ++j) {
      double sy = fft_freq(j, d2[1], h.spacing[1]);
      for (std::size_t i = 0; i < d2[0]; ++i) {
        double sx = fft_freq(i, d2[0], h.spacing[0]);
        work[j * d2[0] + i] = hatf[j * d2[0] + i] * symbol(sx, sy);
      }
    }
    fft2_backward(d2, work.data());
    std::vector<cplx> out(n2);
    double s = 1.0 / double(n2);
    for (std::size_t i = 0; i < n2; ++i) out[i] = work[i] * s;
    return out;
  };
  std::vector<cplx> f_dx = inverse_with([](double sx, double) { return cplx(0, sx); });
  std::vector<cplx> f_dy = inverse_with([](double, double sy) { return cplx(0, sy); });
  std::vector<cplx> f_lap2 =
      inverse_with([](double sx, double sy) { return cplx(-(sx * sx + sy * sy), 0.0); });

  // lift F = f(x1,x2) chi(x3); g_src = Delta F + k^2 F + 2i A . grad F - p F on x3 <= 0
  ExtendedPotentials ext = extend_potentials(scenario);
  ScalarField divA = divergence_fd(ext.A);
  const Grid3 full = ext.A.grid;
  ScalarField gsrc_half(h);
  ScalarField F_half(h);
  VectorField gradF_half(h);
  const cplx I(0, 1);
  double k = scenario.k;
  for (std::size_t kk = 0; kk < h.dims[2]; ++kk) {
    double z = h.origin[2] + double(kk) * h.spacing[2];
    if (z < -w - h.spacing[2]) continue;
    double cz = chi.value(z), cz1 = chi.d1(z), cz2 = chi.d2(z);
    for (std::size_t j = 0; j < h.dims[1]; ++j)
      for (std::size_t i = 0; i < h.dims[0]; ++i) {
        std::size_t n = h.index(i, j, kk);
        std::size_t m = j * d2[0] + i;
        std::size_t nf = full.index(i, j, kk);
        cplx F = f.values[m] * cz;
        CVec3 gF{f_dx[m] * cz, f_dy[m] * cz, f.values[m] * cz1};
        cplx lapF = f_lap2[m] * cz + f.values[m] * cz2;
        cplx a2 = ext.A.v[0][nf] * ext.A.v[0][nf] + ext.A.v[1][nf] * ext.A.v[1][nf] +
                  ext.A.v[2][nf] * ext.A.v[2][nf];
        cplx p = -I * divA.v[nf] + a2 + ext.q.v[nf];
        cplx adotg = ext.A.v[0][nf] * gF.x + ext.A.v[1][nf] * gF.y + ext.A.v[2][nf] * gF.z;
        gsrc_half.v[n] = lapF + k * k * F + 2.0 * I * adotg - p * F;
        F_half.v[n] = F;
        gradF_half.v[0][n] = gF.x;
        gradF_half.v[1][n] = gF.y;
        gradF_half.v[2][n] = gF.z;
      }
  }

  // Continuity correction: the odd extension of g_src jumps across the plane by
  // 2 g0 with g0 = g_src(.,0), which would pin the convolution quadrature error
  // at O((h/w)^2). Subtract the lift term C = (z^2/2) g0(x1,x2) chi(z), whose
  // source cancels the plane value; the corrected extension is C^1 across the
  // plane and the remaining kink is two orders smaller.
  {
    std::size_t kp = h.dims[2] - 1;
    std::vector<cplx> g0(n2);
    for (std::size_t m = 0; m < n2; ++m) g0[m] = gsrc_half.v[h.index(m % d2[0], m / d2[0], kp)];
    CplxBuffer gbuf(n2);
    for (std::size_t i = 0; i < n2; ++i) gbuf[i] = g0[i];
    fft2_forward(d2, gbuf.data());
    for (std::size_t i = 0; i < n2; ++i) hatf[i] = gbuf[i];
    std::vector<cplx> g0_dx = inverse_with([](double sx, double) { return cplx(0, sx); });
    std::vector<cplx> g0_dy = inverse_with([](double, double sy) { return cplx(0, sy); });
    std::vector<cplx> g0_lap2 =
        inverse_with([](double sx, double sy) { return cplx(-(sx * sx + sy * sy), 0.0); });
    for (std::size_t kk = 0; kk < h.dims[2]; ++kk) {
      double z = h.origin[2] + double(kk) * h.spacing[2];
      if (z < -w - h.spacing[2]) continue;
      double cz = chi.value(z), cz1 = chi.d1(z), cz2 = chi.d2(z);
      double z2h = 0.5 * z * z;
      for (std::size_t j = 0; j < h.dims[1]; ++j)
        for (std::size_t i = 0; i < h.dims[0]; ++i) {
          std::size_t n = h.index(i, j, kk);
          std::size_t m = j * d2[0] + i;
          std::size_t nf = full.index(i, j, kk);
          cplx C = z2h * g0[m] * cz;
          CVec3 gC{z2h * g0_dx[m] * cz, z2h * g0_dy[m] * cz,
                   g0[m] * (z * cz + z2h * cz1)};
          cplx lapC = z2h * g0_lap2[m] * cz + g0[m] * (cz + 2.0 * z * cz1 + z2h * cz2);
          cplx a2 = ext.A.v[0][nf] * ext.A.v[0][nf] + ext.A.v[1][nf] * ext.A.v[1][nf] +
                    ext.A.v[2][nf] * ext.A.v[2][nf];
          cplx p = -I * divA.v[nf] + a2 + ext.q.v[nf];
          cplx adotg = ext.A.v[0][nf] * gC.x + ext.A.v[1][nf] * gC.y + ext.A.v[2][nf] * gC.z;
          gsrc_half.v[n] -= lapC + k * k * C + 2.0 * I * adotg - p * C;
          F_half.v[n] -= C;
          gradF_half.v[0][n] -= gC.x;
          gradF_half.v[1][n] -= gC.y;
          gradF_half.v[2][n] -= gC.z;
        }
    }
  }

  // source support: the lift slab over supp(f) plus the potential ball
  Vec3 c = full.center();
  double rf = 0.0;
  for (std::size_t j = 0; j < d2[1]; ++j)
    for (std::size_t i = 0; i < d2[0]; ++i)
      if (std::abs(f.values[j * d2[0] + i]) > 0) {
        double x = h.origin[0] + double(i) * h.spacing[0] - c.x;
        double y = h.origin[1] + double(j) * h.spacing[1] - c.y;
        rf = std::max(rf, std::sqrt(x * x + y * y));
      }
  double srcr = std::max(potential_source_radius(scenario),
                         std::sqrt(rf * rf + w * w) + 2.0 * h.max_spacing());
  gsrc_half.support = SupportBall{c, srcr};

  ScalarField f_ext = reflect_extend_source(gsrc_half);
  ForwardSolver fs(std::move(ext.A), std::move(ext.q), k, scenario.ball, srcr);
  HalfspaceSolution sol = finish_halfspace(fs.solve_freespace(f_ext, opt.tol, opt.max_iter));

  // u = v + F on the half grid (the stored full-grid field stays the odd part v)
  for (std::size_t n = 0; n < h.size(); ++n) {
    sol.u.v[n] += F_half.v[n];
    for (int cc = 0; cc < 3; ++cc) sol.grad_u.v[cc][n] += gradF_half.v[cc][n];
  }
  return sol;
}

}  // namespace mst
