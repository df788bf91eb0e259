#include "mst/validate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mst/fft.hpp"
#include "mst/forward.hpp"
#include "mst/numerics.hpp"

namespace mst {

void append_probe_report_jsonl(const std::string& path, const ProbeReport& rep) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("append_probe_report_jsonl: cannot open " + path);
  os << "{\"probe\":\"" << rep.probe_name << "\",\"ladder\":[";
  char buf[64];
  for (std::size_t i = 0; i < rep.ladder.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.17g", i ? "," : "", rep.ladder[i]);
    os << buf;
  }
  os << "],\"values\":[";
  for (std::size_t i = 0; i < rep.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.17g", i ? "," : "", rep.values[i]);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "],\"fitted_slope\":%.17g,", rep.fitted_slope);
  os << buf;
  std::snprintf(buf, sizeof(buf), "\"threshold\":%.17g,", rep.threshold);
  os << buf << "\"pass\":" << (rep.pass ? "true" : "false") << "}\n";
}

namespace {

// (d_n + i A.n) w on one face of the sub-box, integrated against z (conjugated).
cplx face_pairing(const VectorField& grad_w, const ScalarField& w, const VectorField& A,
                  const ScalarField& z, std::array<std::size_t, 3> lo,
                  std::array<std::size_t, 3> hi) {
  const Grid3& g = w.grid;
  cplx acc = 0.0;
  const cplx I(0, 1);
  // six faces; outward normal n
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      double nsign = side == 0 ? -1.0 : 1.0;
      std::size_t fixed = side == 0 ? lo[axis] : hi[axis];
      std::array<int, 2> other{};
      int o = 0;
      for (int a = 0; a < 3; ++a)
        if (a != axis) other[o++] = a;
      double dA = g.spacing[other[0]] * g.spacing[other[1]];
      for (std::size_t b = lo[other[1]]; b <= hi[other[1]]; ++b)
        for (std::size_t a = lo[other[0]]; a <= hi[other[0]]; ++a) {
          std::array<std::size_t, 3> idx{};
          idx[axis] = fixed;
          idx[other[0]] = a;
          idx[other[1]] = b;
          std::size_t n = g.index(idx[0], idx[1], idx[2]);
          // trapezoid: half weight on the face's edge nodes
          double wgt = 1.0;
          if (a == lo[other[0]] || a == hi[other[0]]) wgt *= 0.5;
          if (b == lo[other[1]] || b == hi[other[1]]) wgt *= 0.5;
          cplx dn = nsign * (grad_w.v[axis][n] + I * A.v[axis][n] * w.v[n]);
          acc += wgt * dn * std::conj(z.v[n]) * dA;
        }
    }
  return acc;
}

cplx volume_pairing(const ScalarField& a, const ScalarField& b, std::array<std::size_t, 3> lo,
                    std::array<std::size_t, 3> hi) {
  const Grid3& g = a.grid;
  cplx acc = 0.0;
  for (std::size_t k = lo[2]; k <= hi[2]; ++k)
    for (std::size_t j = lo[1]; j <= hi[1]; ++j)
      for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
        double w = 1.0;
        if (i == lo[0] || i == hi[0]) w *= 0.5;
        if (j == lo[1] || j == hi[1]) w *= 0.5;
        if (k == lo[2] || k == hi[2]) w *= 0.5;
        std::size_t n = g.index(i, j, k);
        acc += w * a.v[n] * std::conj(b.v[n]);
      }
  return acc * g.cell_volume();
}

}  // namespace

double green_identity_probe(const VectorField& A, const ScalarField& q, const ScalarField& u,
                            const ScalarField& v, std::array<std::size_t, 3> lo,
                            std::array<std::size_t, 3> hi) {
  ScalarField qbar(q.grid);
  for (std::size_t n = 0; n < q.grid.size(); ++n) qbar.v[n] = std::conj(q.v[n]);
  // k = 0: the Green formula is stated for L_{A,q} itself
  ScalarField Lu = apply_magnetic_operator(A, q, 0.0, u, DivMode::Spectral);
  ScalarField Lv = apply_magnetic_operator(A, qbar, 0.0, v, DivMode::Spectral);
  VectorField gu = grad_spectral(u);
  VectorField gv = grad_spectral(v);

  cplx lhs = volume_pairing(Lu, v, lo, hi) - volume_pairing(u, Lv, lo, hi);
  cplx rhs = face_pairing(gv, v, A, u, lo, hi);
  rhs = std::conj(rhs);  // (u, (d_n + iA.n) v) pairs u against the derivative
  cplx rhs2 = face_pairing(gu, u, A, v, lo, hi);
  return std::abs(lhs - (rhs - rhs2));
}

ScalarField carleman_conjugated_apply(const VectorField& A, const ScalarField& q, Vec3 alpha,
                                      double h, const ScalarField& u, CarlemanWeight weight,
                                      double convexify_eps) {
  // e^{phi/h} h^2 L_{A,q} e^{-phi/h} u expanded analytically:
  //   -h^2 Lap u + 2 h (grad phi . grad u) + (h Lap phi - |grad phi|^2) u
  //   + h^2 [-2iA.grad u + p u] + 2 i h (A . grad phi) u
  const Grid3& g = u.grid;
  ScalarField lap = laplacian_spectral(u);
  VectorField gr = grad_spectral(u);
  ScalarField divA = divergence_fd(A);
  ScalarField out(g);
  const cplx I(0, 1);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        std::size_t n = g.index(i, j, k);
        Vec3 x = g.node(i, j, k);
        double ax = dot(alpha, x);
        double conv = weight == CarlemanWeight::Convexified ? convexify_eps : 0.0;
        Vec3 gphi = (1.0 + conv * ax) * alpha;
        double lap_phi = conv;  // |alpha| = 1
        double gphi2 = dot(gphi, gphi);
        CVec3 gw{gr.v[0][n], gr.v[1][n], gr.v[2][n]};
        cplx gphi_dot_gu = gphi.x * gw.x + gphi.y * gw.y + gphi.z * gw.z;
        cplx a_dot_gu = A.v[0][n] * gw.x + A.v[1][n] * gw.y + A.v[2][n] * gw.z;
        cplx a_dot_gphi = A.v[0][n] * gphi.x + A.v[1][n] * gphi.y + A.v[2][n] * gphi.z;
        cplx a2 = A.v[0][n] * A.v[0][n] + A.v[1][n] * A.v[1][n] + A.v[2][n] * A.v[2][n];
        cplx p = -I * divA.v[n] + a2 + q.v[n];
        out.v[n] = -h * h * lap.v[n] + 2.0 * h * gphi_dot_gu +
                   (h * lap_phi - gphi2) * u.v[n] +
                   h * h * (-2.0 * I * a_dot_gu + p * u.v[n]) + 2.0 * I * h * a_dot_gphi * u.v[n];
      }
  return out;
}

ProbeReport carleman_probe(const VectorField& A, const ScalarField& q, Vec3 alpha,
                           const std::vector<ScalarField>& battery,
                           const std::vector<double>& h_ladder, const CarlemanOptions& opt) {
  ProbeReport rep;
  rep.probe_name = "carleman";
  rep.threshold = opt.min_ratio;
  for (double h : h_ladder) {
    double min_ratio = std::numeric_limits<double>::infinity();
    for (const ScalarField& u : battery) {
      ScalarField Lu = carleman_conjugated_apply(A, q, alpha, h, u, opt.weight,
                                                 opt.convexify_eps);
      VectorField gu = grad_spectral(u);
      double nL = l2_norm(Lu);
      double nu = l2_norm(u);
      double ngu = l2_norm(gu);
      double h1scl = std::sqrt(nu * nu + h * h * ngu * ngu);
      min_ratio = std::min(min_ratio, nL / (h * h1scl));
    }
    rep.ladder.push_back(h);
    rep.values.push_back(min_ratio);
  }
  rep.fitted_slope = fit_loglog_slope(rep.ladder, rep.values);
  bool positive = true;
  for (double v : rep.values)
    if (!(v >= opt.min_ratio)) positive = false;
  // a decay toward zero as h shrinks shows up as ratio ~ h^p with p well above
  // zero, i.e. a clearly positive log-log slope
  rep.pass = positive && rep.fitted_slope <= opt.slope_ceiling;
  return rep;
}

ProbeReport rellich_probe(const ScalarField& u, const std::vector<double>& radii,
                          const RellichOptions& opt) {
  ProbeReport rep;
  rep.probe_name = "rellich";
  rep.threshold = opt.null_threshold;
  Vec3 c = u.grid.center();
  double dth = pi / double(opt.n_theta), dph = 2.0 * pi / double(opt.n_phi);
  for (double r : radii) {
    Vec3 lo = u.grid.box_min(), hi = u.grid.box_max();
    bool fits = true;
    for (int a = 0; a < 3; ++a)
      if (c[a] - r < lo[a] + u.grid.spacing[a] || c[a] + r > hi[a] - u.grid.spacing[a])
        fits = false;
    if (!fits) break;  // truncate the ladder at the grid boundary
    double acc = 0.0;
    for (std::size_t it = 0; it < opt.n_theta; ++it) {
      double th = (double(it) + 0.5) * dth;
      for (std::size_t ip = 0; ip < opt.n_phi; ++ip) {
        double ph = double(ip) * dph;
        Vec3 dir{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        acc += std::norm(sample_tricubic(u, c + r * dir)) * std::sin(th) * dth * dph;
      }
    }
    rep.ladder.push_back(r);
    rep.values.push_back(acc * r * r);
  }
  // classification: integrals trending to the null threshold mean the field
  // vanishes outside the ball
  bool all_null = true;
  for (double v : rep.values)
    if (v > opt.null_threshold) all_null = false;
  rep.pass = all_null;
  rep.fitted_slope = 0.0;
  if (rep.values.size() >= 2) {
    bool positive = true;
    for (double v : rep.values)
      if (!(v > 0.0)) positive = false;
    if (positive) rep.fitted_slope = fit_loglog_slope(rep.ladder, rep.values);
  }
  return rep;
}

}  // namespace mst
