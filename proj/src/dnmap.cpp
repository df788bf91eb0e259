#include "mst/dnmap.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mst/numerics.hpp"

namespace mst {

namespace {

// Plane data with C^1 bicubic (Catmull-Rom) interpolation carrying exact
// interpolant gradients, so the mollification quadrature below can be
// differentiated exactly as a discrete object.
struct PlaneField {
  Grid3 g3;
  std::vector<cplx> v;

  explicit PlaneField(const Grid3& grid3) : g3(grid3), v(grid3.dims[0] * grid3.dims[1]) {}
  cplx& at(std::size_t i, std::size_t j) { return v[j * g3.dims[0] + i]; }

  struct Probe {
    cplx val{}, dx{}, dy{};
  };

  Probe sample(double x, double y) const {
    double fx = (x - g3.origin[0]) / g3.spacing[0];
    double fy = (y - g3.origin[1]) / g3.spacing[1];
    Probe out;
    if (fx < 0.5 || fy < 0.5 || fx > double(g3.dims[0]) - 1.5 || fy > double(g3.dims[1]) - 1.5)
      return out;
    std::ptrdiff_t ix = std::ptrdiff_t(std::floor(fx));
    std::ptrdiff_t iy = std::ptrdiff_t(std::floor(fy));
    double tx = fx - double(ix), ty = fy - double(iy);
    auto clampi = [&](std::ptrdiff_t i, std::size_t n) {
      return std::size_t(std::max<std::ptrdiff_t>(0, std::min<std::ptrdiff_t>(i, n - 1)));
    };
    auto cr = [](double t, const cplx* p, cplx& val, cplx& der) {
      cplx a = 2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3];
      cplx b = 3.0 * (p[1] - p[2]) + p[3] - p[0];
      val = p[1] + 0.5 * t * (p[2] - p[0] + t * (a + t * b));
      der = 0.5 * (p[2] - p[0]) + t * a + 1.5 * t * t * b;
    };
    cplx col[4], cold[4], row[4];
    for (int dy2 = -1; dy2 <= 2; ++dy2) {
      std::size_t jj = clampi(iy + dy2, g3.dims[1]);
      for (int dx2 = -1; dx2 <= 2; ++dx2)
        row[dx2 + 1] = v[jj * g3.dims[0] + clampi(ix + dx2, g3.dims[0])];
      cr(tx, row, col[dy2 + 1], cold[dy2 + 1]);
    }
    cplx dummy;
    cr(ty, col, out.val, out.dy);
    cr(ty, cold, out.dx, dummy);
    out.dx /= g3.spacing[0];
    out.dy /= g3.spacing[1];
    return out;
  }
};

struct MollifierQuad {
  std::vector<double> y1, y2, w;  // unit-mass weights for the 2D bump mollifier
};

// Fixed tensor quadrature over the unit-ball support of the 2D bump mollifier;
// weights sum to exactly 1 so that constants reproduce.
MollifierQuad make_mollifier_quad(std::size_t n = 20) {
  MollifierQuad q;
  double d = 2.0 / double(n);
  double sphi = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      double a = -1.0 + (double(i) + 0.5) * d;
      double b = -1.0 + (double(j) + 0.5) * d;
      double r2 = a * a + b * b;
      if (r2 >= 1.0) continue;
      double phi = mollifier_profile(r2);
      q.y1.push_back(a);
      q.y2.push_back(b);
      q.w.push_back(phi * d * d);
      sphi += phi * d * d;
    }
  for (double& w : q.w) w /= sphi;
  return q;
}

}  // namespace

GaugeFixResult gauge_fix(const VectorField& A, double cutoff_depth) {
  const Grid3& h = A.grid;
  double top = h.origin[2] + double(h.dims[2] - 1) * h.spacing[2];
  if (std::abs(top) > 1e-10 * h.spacing[2])
    throw std::invalid_argument("gauge_fix: A must live on the x3 <= 0 half grid");

  double depth = -h.origin[2];
  double d_cut = cutoff_depth > 0 ? cutoff_depth : 0.5 * depth;

  // v = -A3(., 0)
  PlaneField v(h);
  std::size_t ktop = h.dims[2] - 1;
  bool trivial = true;
  for (std::size_t j = 0; j < h.dims[1]; ++j)
    for (std::size_t i = 0; i < h.dims[0]; ++i) {
      cplx val = -A.v[2][h.index(i, j, ktop)];
      v.at(i, j) = val;
      if (std::abs(val) != 0.0) trivial = false;
    }

  GaugeFixResult out;
  out.gauge.psi = ScalarField(h);
  out.gauge.grad_psi = VectorField(h);
  out.A_fixed = A;
  if (trivial) return out;  // A3 already vanishes on the plane

  MollifierQuad quad = make_mollifier_quad();

  // chi(z) = 1 for z >= -0.6 d_cut, 0 for z <= -d_cut (polynomial C^4 step)
  double tw = 0.4 * d_cut;
  auto chi = [&](double z) { return poly_smoothstep((z + d_cut) / tw); };

  for (std::size_t kk = 0; kk + 1 < h.dims[2]; ++kk) {
    double z = h.origin[2] + double(kk) * h.spacing[2];
    double t = -z;
    double cz = chi(z);
    if (cz == 0.0) continue;
    for (std::size_t j = 0; j < h.dims[1]; ++j)
      for (std::size_t i = 0; i < h.dims[0]; ++i) {
        double x = h.origin[0] + double(i) * h.spacing[0];
        double y = h.origin[1] + double(j) * h.spacing[1];
        cplx u = 0.0;
        for (std::size_t qq = 0; qq < quad.y1.size(); ++qq)
          u += quad.w[qq] * v.sample(x - t * quad.y1[qq], y - t * quad.y2[qq]).val;
        out.gauge.psi.v[h.index(i, j, kk)] = z * u * cz;  // t u(x', t) chi
      }
  }

  // psi is odd and smooth across the plane (u is even in t for the symmetric
  // mollifier), so the gradient is taken spectrally on the mirror extension; the
  // plane row then gets the exact analytic limit grad psi(.,0) = (0, 0, v).
  ScalarField psi_full = reflect_extend(out.gauge.psi, Parity::Odd);
  out.gauge.grad_psi = restrict_to_half(grad_spectral(psi_full));
  for (std::size_t j = 0; j < h.dims[1]; ++j)
    for (std::size_t i = 0; i < h.dims[0]; ++i) {
      std::size_t n = h.index(i, j, ktop);
      out.gauge.grad_psi.v[0][n] = 0.0;
      out.gauge.grad_psi.v[1][n] = 0.0;
      out.gauge.grad_psi.v[2][n] = v.at(i, j);
    }

  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < h.size(); ++n)
      out.A_fixed.v[c][n] = A.v[c][n] + out.gauge.grad_psi.v[c][n];
  if (A.support) {
    SupportBall grown = *A.support;
    grown.radius += d_cut;
    out.A_fixed.support = grown;
    out.gauge.psi.support = grown;
    out.gauge.grad_psi.support = grown;
  }
  return out;
}

DNRecord dn_apply(const Scenario& scenario, const BoundaryTrace& f,
                  const DirichletOptions& opt) {
  HalfspaceSolution sol = solve_halfspace_dirichlet(scenario, f, opt);
  const Grid3& h = scenario.grid();
  std::size_t kp = h.dims[2] - 1;  // plane layer of the half grid
  if (kp < 4) throw std::invalid_argument("dn_apply: grid too shallow for the 4th-order stencil");

  DNRecord rec;
  rec.grid3 = h;
  rec.values.assign(h.dims[0] * h.dims[1], cplx(0.0));
  rec.gamma1_mask.assign(h.dims[0] * h.dims[1], 0);
  double dz = h.spacing[2];
  for (std::size_t j = 0; j < h.dims[1]; ++j)
    for (std::size_t i = 0; i < h.dims[0]; ++i) {
      // one-sided 4th-order derivative in +x3 using the plane node and 4 below
      cplx d3 = (25.0 * sol.u.at(i, j, kp) - 48.0 * sol.u.at(i, j, kp - 1) +
                 36.0 * sol.u.at(i, j, kp - 2) - 16.0 * sol.u.at(i, j, kp - 3) +
                 3.0 * sol.u.at(i, j, kp - 4)) /
                (12.0 * dz);
      cplx a3 = scenario.A.v[2][h.index(i, j, kp)];
      rec.values[rec.index(i, j)] = d3 + cplx(0, 1) * a3 * f.values[rec.index(i, j)];
      double x = h.origin[0] + double(i) * h.spacing[0];
      double y = h.origin[1] + double(j) * h.spacing[1];
      if (scenario.gamma1.contains(x, y)) rec.gamma1_mask[rec.index(i, j)] = 1;
    }
  return rec;
}

void write_dn_record_csv(const std::string& path, const DNRecord& rec) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_dn_record_csv: cannot open " + path);
  os << "x1,x2,re,im,in_gamma1\n";
  char line[160];
  for (std::size_t j = 0; j < rec.grid3.dims[1]; ++j)
    for (std::size_t i = 0; i < rec.grid3.dims[0]; ++i) {
      double x = rec.grid3.origin[0] + double(i) * rec.grid3.spacing[0];
      double y = rec.grid3.origin[1] + double(j) * rec.grid3.spacing[1];
      std::size_t n = rec.index(i, j);
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%d\n", x, y,
                    rec.values[n].real(), rec.values[n].imag(), int(rec.gamma1_mask[n]));
      os << line;
    }
}

GaugeInvarianceReport gauge_invariance_check(const Scenario& scenario,
                                             const GaugeFunction& gauge,
                                             const BoundaryTrace& f,
                                             const DirichletOptions& opt) {
  // psi must vanish on the plane (gauge invariance hypothesis)
  const Grid3& h = scenario.grid();
  std::size_t ktop = h.dims[2] - 1;
  double m = 0.0;
  for (std::size_t j = 0; j < h.dims[1]; ++j)
    for (std::size_t i = 0; i < h.dims[0]; ++i)
      m = std::max(m, std::abs(gauge.psi.v[h.index(i, j, ktop)]));
  if (m > 1e-12 * std::max(1.0, linf_norm(gauge.psi)))
    throw std::invalid_argument("gauge_invariance_check: psi must vanish on the plane");

  Scenario shifted = scenario;
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < h.size(); ++n)
      shifted.A.v[c][n] = scenario.A.v[c][n] + gauge.grad_psi.v[c][n];

  GaugeInvarianceReport rep;
  rep.base = dn_apply(scenario, f, opt);
  rep.shifted = dn_apply(shifted, f, opt);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < rep.base.values.size(); ++n) {
    if (!rep.base.gamma1_mask[n]) continue;
    num += std::norm(rep.base.values[n] - rep.shifted.values[n]);
    den += std::norm(rep.base.values[n]);
  }
  rep.deviation = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  return rep;
}

}  // namespace mst
