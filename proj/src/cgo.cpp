#include "mst/cgo.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "mst/fft.hpp"
#include "mst/numerics.hpp"

namespace mst {

CGOSpec make_zeta_pair(double h, Vec3 xi, Vec3 gamma1, Vec3 gamma2) {
  if (!(h > 0.0)) throw std::invalid_argument("make_zeta_pair: h must be positive");
  if (h * norm(xi) >= 2.0)
    throw std::invalid_argument("make_zeta_pair: h |xi| must be below 2");
  if (std::abs(norm(gamma1) - 1.0) > 1e-10 || std::abs(norm(gamma2) - 1.0) > 1e-10)
    throw std::invalid_argument("make_zeta_pair: gamma vectors must be unit");
  if (std::abs(dot(gamma1, gamma2)) > 1e-10 || std::abs(dot(gamma1, xi)) > 1e-10 ||
      std::abs(dot(gamma2, xi)) > 1e-10)
    throw std::invalid_argument("make_zeta_pair: {gamma1, gamma2, xi} must be orthogonal");
  if (std::abs(gamma1.z) > 1e-12)
    throw std::invalid_argument("make_zeta_pair: gamma1 must be tangential (gamma1.z = 0)");
  if (std::abs(gamma2.z) < 1e-12)
    throw std::invalid_argument("make_zeta_pair: gamma2.z must not vanish");

  CGOSpec s;
  s.h = h;
  s.xi = xi;
  s.gamma1 = gamma1;
  s.gamma2 = gamma2;
  s.eps = std::cbrt(h);
  double root = std::sqrt(1.0 - h * h * dot(xi, xi) / 4.0);
  const cplx I(0, 1);
  for (int c = 0; c < 3; ++c) {
    s.zeta1[c] = I * (0.5 * h * xi[c]) + gamma1[c] + I * root * gamma2[c];
    s.zeta2[c] = -I * (0.5 * h * xi[c]) - gamma1[c] + I * root * gamma2[c];
  }
  return s;
}

std::pair<Vec3, Vec3> special_gammas(Vec3 xi) {
  double t = std::sqrt(xi.x * xi.x + xi.y * xi.y);
  if (t < 1e-12 * std::max(1.0, std::abs(xi.z)) || t == 0.0)
    throw std::invalid_argument("special_gammas: xi must be off the x3 axis");
  Vec3 g1 = normalized({-xi.y, xi.x, 0.0});
  Vec3 g2 = normalized(cross(xi, g1));
  return {g1, g2};
}

namespace {

// Cached geometry for repeated Cauchy transforms on one slice layout: padded
// dims, truncation radius, and the analytic symbol of the truncated kernel,
//   FT[ 1/(pi z) 1_{|z|<T} ](s) = -2i (1 - J0(|s| T)) / (s1 + i s2),
// which makes the convolution spectrally accurate (aliasing-only error).
struct CauchyPlan {
  std::array<std::size_t, 2> padded;
  std::vector<cplx> symbol;

  CauchyPlan(std::array<double, 2> spacing, std::array<std::size_t, 2> dims) {
    double ex = double(dims[0] - 1) * spacing[0];
    double ey = double(dims[1] - 1) * spacing[1];
    double T = 1.05 * std::sqrt(ex * ex + ey * ey) + 2.0 * std::max(spacing[0], spacing[1]);
    for (int a = 0; a < 2; ++a) {
      double ext = a == 0 ? ex : ey;
      std::size_t need = std::size_t(std::ceil((ext + T) / spacing[a])) + 2;
      padded[a] = fft_nice_size(std::max(need, dims[a]));
    }
    symbol.resize(padded[0] * padded[1]);
    for (std::size_t j = 0; j < padded[1]; ++j) {
      double s2 = fft_freq(j, padded[1], spacing[1]);
      for (std::size_t i = 0; i < padded[0]; ++i) {
        double s1 = fft_freq(i, padded[0], spacing[0]);
        double sr = std::sqrt(s1 * s1 + s2 * s2);
        cplx sc(s1, s2);
        symbol[j * padded[0] + i] =
            sr == 0.0 ? cplx(0.0)
                      : cplx(0.0, -2.0) * (1.0 - std::cyl_bessel_j(0.0, sr * T)) / sc;
      }
    }
  }
};

Field2 cauchy_with_plan(const Field2& f, const CauchyPlan& plan) {
  const auto& p = plan.padded;
  std::size_t np = p[0] * p[1];
  CplxBuffer data(np);
  for (std::size_t j = 0; j < f.dims[1]; ++j)
    for (std::size_t i = 0; i < f.dims[0]; ++i) data[j * p[0] + i] = f.v[f.index(i, j)];
  fft2_forward(p, data.data());
  double scale = 1.0 / double(np);
  for (std::size_t n = 0; n < np; ++n) data[n] *= plan.symbol[n] * scale;
  fft2_backward(p, data.data());
  Field2 out(f.origin, f.spacing, f.dims);
  for (std::size_t j = 0; j < f.dims[1]; ++j)
    for (std::size_t i = 0; i < f.dims[0]; ++i) out.v[out.index(i, j)] = data[j * p[0] + i];
  return out;
}

}  // namespace

Field2 cauchy_transform(const Field2& f) {
  for (std::size_t j = 0; j < f.dims[1]; ++j)
    for (std::size_t i = 0; i < f.dims[0]; ++i)
      if (i < 2 || j < 2 || i + 2 >= f.dims[0] || j + 2 >= f.dims[1])
        if (f.v[f.index(i, j)] != cplx(0.0))
          throw std::invalid_argument("cauchy_transform: input must vanish on the border ring");
  CauchyPlan plan(f.spacing, f.dims);
  return cauchy_with_plan(f, plan);
}

namespace {

struct Frame {
  Vec3 alpha, beta, gamma;  // orthonormal; gamma = alpha x beta
  Vec3 center;

  Vec3 to_frame(Vec3 x) const {
    Vec3 d = x - center;
    return {dot(d, alpha), dot(d, beta), dot(d, gamma)};
  }
  Vec3 from_frame(Vec3 y) const {
    return center + y.x * alpha + y.y * beta + y.z * gamma;
  }
};

// Slice-wise Cauchy solve of 2 dzbar (Phi o T^{-1}) = data o T^{-1} for a stack
// of scalar data fields given on the original grid; returns values on the grid.
// All fields share one frame/rotated-grid geometry and one Cauchy plan.
struct SliceWorkspace {
  Frame frame;
  Grid3 rgrid;  // rotated frame grid (cube, same spacing)
  std::unique_ptr<CauchyPlan> plan;

  SliceWorkspace(const Grid3& g, Vec3 center, Vec3 alpha, Vec3 beta) {
    frame.alpha = alpha;
    frame.beta = beta;
    frame.gamma = cross(alpha, beta);
    frame.center = center;
    auto ext = g.extent();
    double half = 0.5 * std::sqrt(ext[0] * ext[0] + ext[1] * ext[1] + ext[2] * ext[2]);
    double d = g.max_spacing();
    std::size_t n = std::size_t(std::ceil(2.0 * (half + 2.0 * d) / d)) + 1;
    rgrid = make_cube_grid({0, 0, 0}, 0.5 * double(n - 1) * d, n);
    plan = std::make_unique<CauchyPlan>(
        std::array<double, 2>{rgrid.spacing[0], rgrid.spacing[1]},
        std::array<std::size_t, 2>{rgrid.dims[0], rgrid.dims[1]});
  }

  // Cauchy-transform the rotated samples of `data` slice by slice and resample
  // the result back onto the original grid nodes. Rotated nodes outside the
  // declared support ball (plus the interpolation stencil) sample as zero
  // without touching the interpolant, which skips most of the rotated cube.
  ScalarField run(const ScalarField& data) const {
    const Grid3& g = data.grid;
    double skip_r2 = -1.0;
    if (data.support) {
      double rr = data.support->radius + 3.0 * g.max_spacing();
      skip_r2 = rr * rr;
    }
    Vec3 supp_c = data.support ? data.support->center : Vec3{};
    // rotate in
    std::vector<cplx> rot(rgrid.size());
    for (std::size_t k = 0; k < rgrid.dims[2]; ++k)
      for (std::size_t j = 0; j < rgrid.dims[1]; ++j)
        for (std::size_t i = 0; i < rgrid.dims[0]; ++i) {
          Vec3 p = frame.from_frame(rgrid.node(i, j, k));
          if (skip_r2 > 0.0) {
            Vec3 d = p - supp_c;
            if (dot(d, d) > skip_r2) continue;
          }
          rot[rgrid.index(i, j, k)] = sample_tricubic(data, p);
        }
    // per-slice Cauchy transform
    Field2 slice({rgrid.origin[0], rgrid.origin[1]}, {rgrid.spacing[0], rgrid.spacing[1]},
                 {rgrid.dims[0], rgrid.dims[1]});
    ScalarField rphi(rgrid);
    for (std::size_t k = 0; k < rgrid.dims[2]; ++k) {
      bool nonzero = false;
      for (std::size_t j = 0; j < rgrid.dims[1]; ++j)
        for (std::size_t i = 0; i < rgrid.dims[0]; ++i) {
          cplx val = rot[rgrid.index(i, j, k)];
          // clip quadrature fuzz that would trip the border-ring check
          if (i < 2 || j < 2 || i + 2 >= rgrid.dims[0] || j + 2 >= rgrid.dims[1]) val = 0.0;
          slice.v[slice.index(i, j)] = val;
          if (val != cplx(0.0)) nonzero = true;
        }
      if (!nonzero) continue;
      Field2 u = cauchy_with_plan(slice, *plan);
      for (std::size_t j = 0; j < rgrid.dims[1]; ++j)
        for (std::size_t i = 0; i < rgrid.dims[0]; ++i)
          rphi.at(i, j, k) = 0.5 * u.v[u.index(i, j)];  // Phi = N^{-1}(data)/2
    }
    // rotate back
    ScalarField out(g);
    for (std::size_t k = 0; k < g.dims[2]; ++k)
      for (std::size_t j = 0; j < g.dims[1]; ++j)
        for (std::size_t i = 0; i < g.dims[0]; ++i)
          out.at(i, j, k) = sample_tricubic(rphi, frame.to_frame(g.node(i, j, k)));
    return out;
  }
};

ScalarField dot_with(const CVec3& zeta0, const VectorField& A) {
  ScalarField out(A.grid);
  out.support = A.support;
  const cplx mi(0, -1);
  for (std::size_t n = 0; n < A.grid.size(); ++n)
    out.v[n] = mi * (zeta0.x * A.v[0][n] + zeta0.y * A.v[1][n] + zeta0.z * A.v[2][n]);
  return out;
}

}  // namespace

ExponentBundle solve_transport(const VectorField& A, Vec3 alpha, Vec3 beta, double mollify_eps,
                               TransportDiagnostics* diag, bool with_lap) {
  if (!A.support) throw std::invalid_argument("solve_transport: A needs support metadata");
  if (std::abs(dot(alpha, beta)) > 1e-10 || std::abs(norm(alpha) - 1.0) > 1e-10 ||
      std::abs(norm(beta) - 1.0) > 1e-10)
    throw std::invalid_argument("solve_transport: frame must be orthonormal");

  const Grid3& g = A.grid;
  VectorField As = A;
  if (mollify_eps > 0.0) As = mollify(A, mollify_eps).sharp;

  CVec3 zeta0{cplx(alpha.x, beta.x), cplx(alpha.y, beta.y), cplx(alpha.z, beta.z)};
  SliceWorkspace ws(g, A.support->center, alpha, beta);

  // derivative data on the original grid; the whole bundle goes through the same
  // slice route so grad/lap differentiate one discrete object
  std::array<VectorField, 3> dAs;
  for (int c = 0; c < 3; ++c) dAs[c] = grad_spectral(As.component(c));
  ExponentBundle out;
  out.val = ws.run(dot_with(zeta0, As));
  out.grad = VectorField(g);
  for (int axis = 0; axis < 3; ++axis) {
    VectorField dA(g);
    dA.support = As.support;
    for (int c = 0; c < 3; ++c) dA.v[c] = dAs[c].v[axis];
    out.grad.v[axis] = ws.run(dot_with(zeta0, dA)).v;
  }
  if (with_lap) {
    VectorField lapA(g);
    lapA.support = As.support;
    for (int c = 0; c < 3; ++c) lapA.v[c] = laplacian_spectral(As.component(c)).v;
    out.lap = ws.run(dot_with(zeta0, lapA));
  } else {
    out.lap = ScalarField(g);
  }

  if (diag) {
    diag->mollifier_eps = mollify_eps;
    diag->slice_padding = 0.5 * double(ws.rgrid.dims[0] - 1) * ws.rgrid.spacing[0];
    double worst = 0.0;
    Vec3 c = A.support->center;
    double r = A.support->radius;
    for (std::size_t k = 0; k < g.dims[2]; ++k)
      for (std::size_t j = 0; j < g.dims[1]; ++j)
        for (std::size_t i = 0; i < g.dims[0]; ++i) {
          if (norm(g.node(i, j, k) - c) > r) continue;
          std::size_t n = g.index(i, j, k);
          cplx res = zeta0.x * out.grad.v[0][n] + zeta0.y * out.grad.v[1][n] +
                     zeta0.z * out.grad.v[2][n];
          res += cplx(0, 1) * (zeta0.x * As.v[0][n] + zeta0.y * As.v[1][n] +
                               zeta0.z * As.v[2][n]);
          worst = std::max(worst, std::abs(res));
        }
    diag->transport_residual_sup = worst;
  }
  return out;
}

Amplitude build_amplitude(const CGOSpec& spec, int which, const VectorField& A,
                          const ScalarField& q, double k, const ExponentBundle& phi,
                          const ExponentBundle* minus_psi, SupportBall ball,
                          double g_threshold) {
  const Grid3& g = A.grid;
  if (which != 1 && which != 2) throw std::invalid_argument("build_amplitude: which is 1 or 2");
  CVec3 zeta = which == 1 ? spec.zeta1 : spec.zeta2;
  CVec3 zeta0 = which == 1 ? spec.zeta0_1() : spec.zeta0_2();

  Amplitude out;
  out.a = ScalarField(g);
  out.grad_a = VectorField(g);
  out.Lza = ScalarField(g);

  // exponent E = Phi - Psi; g = e^{-Psi} must be transported by zeta0
  std::vector<double> mask = ball_mask(g, ball.center, ball.radius);
  if (minus_psi) {
    double worst = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (mask[n] == 0.0) continue;
      cplx res = zeta0.x * minus_psi->grad.v[0][n] + zeta0.y * minus_psi->grad.v[1][n] +
                 zeta0.z * minus_psi->grad.v[2][n];
      worst = std::max(worst, std::abs(res));
    }
    out.g_residual = worst;
    if (worst > g_threshold)
      throw std::invalid_argument("build_amplitude: g transport residual above threshold");
  }

  ScalarField divA = divergence_fd(A);
  const cplx I(0, 1);
  double h = spec.h;
  for (std::size_t n = 0; n < g.size(); ++n) {
    cplx E = phi.val.v[n];
    CVec3 gE{phi.grad.v[0][n], phi.grad.v[1][n], phi.grad.v[2][n]};
    cplx lE = phi.lap.v[n];
    if (minus_psi) {
      E -= minus_psi->val.v[n];
      for (int c = 0; c < 3; ++c) gE[c] -= minus_psi->grad.v[c][n];
      lE -= minus_psi->lap.v[n];
    }
    cplx a = std::exp(E);
    out.a.v[n] = a;
    for (int c = 0; c < 3; ++c) out.grad_a.v[c][n] = a * gE[c];

    CVec3 Av{A.v[0][n], A.v[1][n], A.v[2][n]};
    cplx a2 = Av.x * Av.x + Av.y * Av.y + Av.z * Av.z;
    cplx p = -I * divA.v[n] + a2 + q.v[n];
    cplx lap_a_over_a = lE + bdot(gE, gE);
    cplx zeta_dot_gE = bdot(zeta, gE);
    cplx A_dot_gE = Av.x * gE.x + Av.y * gE.y + Av.z * gE.z;
    cplx A_dot_zeta = bdot(zeta, Av);
    out.Lza.v[n] = a * (-h * h * lap_a_over_a - 2.0 * h * zeta_dot_gE -
                        2.0 * I * h * h * A_dot_gE - 2.0 * I * h * A_dot_zeta +
                        h * h * (p - k * k));
  }
  double sup = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    if (mask[n] != 0.0) sup = std::max(sup, std::abs(out.Lza.v[n]));
  out.residual_sup = sup;
  return out;
}

ReflectedPair reflected_pair(const CGOSpec& spec, const Amplitude& a1, const Amplitude& a2) {
  const Grid3& g = a1.a.grid;
  if (!g.mirror_ready())
    throw std::invalid_argument("reflected_pair: amplitudes must live on a mirror-ready grid");
  if (!a2.a.grid.same_layout(g))
    throw std::invalid_argument("reflected_pair: amplitude grids differ");

  ReflectedPair out{ScalarField(g), ScalarField(g), VectorField(g), VectorField(g)};
  std::size_t kp = g.plane_k();
  double h = spec.h;
  for (int which = 1; which <= 2; ++which) {
    const Amplitude& amp = which == 1 ? a1 : a2;
    ScalarField& u = which == 1 ? out.u1 : out.u2;
    VectorField& gu = which == 1 ? out.grad_u1 : out.grad_u2;
    CVec3 zeta = which == 1 ? spec.zeta1 : spec.zeta2;
    for (std::size_t kk = 0; kk < g.dims[2]; ++kk) {
      std::size_t km = 2 * kp - kk;
      for (std::size_t j = 0; j < g.dims[1]; ++j)
        for (std::size_t i = 0; i < g.dims[0]; ++i) {
          std::size_t n = g.index(i, j, kk);
          std::size_t nm = g.index(i, j, km);
          Vec3 x = g.node(i, j, kk);
          Vec3 xm = g.node(i, j, km);  // = xtilde
          cplx ph = std::exp(bdot(zeta, x) / h);
          cplx phm = std::exp(bdot(zeta, xm) / h);
          u.v[n] = ph * amp.a.v[n] - phm * amp.a.v[nm];
          for (int c = 0; c < 3; ++c) {
            double sgn = c == 2 ? -1.0 : 1.0;  // d/dx_c of F(xtilde)
            gu.v[c][n] = ph * (zeta[c] / h * amp.a.v[n] + amp.grad_a.v[c][n]) -
                         sgn * phm * (zeta[c] / h * amp.a.v[nm] + amp.grad_a.v[c][nm]);
          }
        }
    }
  }
  return out;
}

namespace {

// L_zeta w = -h^2 Lap w - 2 h zeta . grad w - 2 i h^2 A . grad w + c(x) w with
// c = -2 i h (A . zeta) + h^2 (p - k^2); and its adjoint. Spectral derivatives.
struct ConjugatedOperator {
  const Grid3& g;
  double h, k;
  CVec3 zeta;
  const VectorField& A;
  ScalarField c0;       // zero-order coefficient
  ScalarField divA;

  ConjugatedOperator(const Grid3& gg, double hh, double kk_, CVec3 z, const VectorField& AA,
                     const ScalarField& qq)
      : g(gg), h(hh), k(kk_), zeta(z), A(AA) {
    divA = divergence_fd(AA);
    c0 = ScalarField(gg);
    const cplx I(0, 1);
    for (std::size_t n = 0; n < gg.size(); ++n) {
      cplx a2 = AA.v[0][n] * AA.v[0][n] + AA.v[1][n] * AA.v[1][n] + AA.v[2][n] * AA.v[2][n];
      cplx p = -I * divA.v[n] + a2 + qq.v[n];
      cplx Az = bdot(z, CVec3{AA.v[0][n], AA.v[1][n], AA.v[2][n]});
      c0.v[n] = -2.0 * I * hh * Az + hh * hh * (p - kk_ * kk_);
    }
  }

  void apply(const std::vector<cplx>& w, std::vector<cplx>& out, bool adjoint) const {
    // one forward transform feeds the Laplacian and all three derivatives
    std::size_t n = g.size();
    CplxBuffer hat(n), work(n);
    for (std::size_t m = 0; m < n; ++m) hat[m] = w[m];
    fft3_forward(g.dims, hat.data());
    out.assign(n, cplx(0.0));
    std::vector<cplx> lap(n), gc(n);
    double inv = 1.0 / double(n);
    for (int c = 0; c < 4; ++c) {
      std::size_t idx = 0;
      for (std::size_t kk = 0; kk < g.dims[2]; ++kk) {
        double sz = fft_freq(kk, g.dims[2], g.spacing[2]);
        for (std::size_t j = 0; j < g.dims[1]; ++j) {
          double sy = fft_freq(j, g.dims[1], g.spacing[1]);
          for (std::size_t i = 0; i < g.dims[0]; ++i, ++idx) {
            double sx = fft_freq(i, g.dims[0], g.spacing[0]);
            if (c == 0)
              work[idx] = hat[idx] * (-(sx * sx + sy * sy + sz * sz));
            else
              work[idx] = hat[idx] * cplx(0.0, c == 1 ? sx : (c == 2 ? sy : sz));
          }
        }
      }
      fft3_backward(g.dims, work.data());
      if (c == 0)
        for (std::size_t m = 0; m < n; ++m) lap[m] = work[m] * inv;
      else {
        const cplx zc = adjoint ? std::conj(zeta[c - 1]) : zeta[c - 1];
        const cplx I(0, 1);
        for (std::size_t m = 0; m < n; ++m) {
          cplx gw = work[m] * inv;
          out[m] += (adjoint ? 2.0 : -2.0) * h * zc * gw - 2.0 * I * h * h * A.v[c - 1][m] * gw;
        }
      }
    }
    const cplx I(0, 1);
    for (std::size_t m = 0; m < n; ++m) {
      out[m] += -h * h * lap[m];
      if (!adjoint) {
        out[m] += c0.v[m] * w[m];
      } else {
        out[m] += -2.0 * I * h * h * divA.v[m] * w[m] + std::conj(c0.v[m]) * w[m];
      }
    }
  }
};

}  // namespace

RemainderResult solve_remainder(const CGOSpec& spec, int which, const VectorField& A,
                                const ScalarField& q, double k, const Amplitude& amp,
                                SupportBall ball, double lambda, double cg_tol,
                                std::size_t max_iter) {
  const Grid3& g = A.grid;
  CVec3 zeta = which == 1 ? spec.zeta1 : spec.zeta2;
  double im_z = 0.0;
  for (int c = 0; c < 3; ++c) im_z = std::max(im_z, std::abs(zeta[c].imag()));
  double h = spec.h;
  double h_min = 4.0 * g.max_spacing() * im_z / (2.0 * pi);
  if (h < h_min)
    throw std::invalid_argument("solve_remainder: oscillation under-resolved; need h >= " +
                                std::to_string(h_min));
  if (lambda <= 0.0) lambda = h * h;

  ConjugatedOperator op(g, h, k, zeta, A, q);

  // rhs = -L^H Lza
  std::vector<cplx> rhs;
  op.apply(amp.Lza.v, rhs, true);
  for (cplx& z : rhs) z = -z;

  // normal operator with H1scl damping
  std::vector<cplx> tmp1, tmp2;
  auto normal_apply = [&](const std::vector<cplx>& w, std::vector<cplx>& out) {
    op.apply(w, tmp1, false);
    op.apply(tmp1, tmp2, true);
    ScalarField wf(g);
    wf.v = w;
    ScalarField lap = laplacian_spectral(wf);
    out.resize(g.size());
    for (std::size_t n = 0; n < g.size(); ++n)
      out[n] = tmp2[n] + lambda * (w[n] - h * h * lap.v[n]);
  };

  // Fourier-diagonal preconditioner: |sigma0|^2 + lambda (1 + h^2 |s|^2)
  std::vector<double> pinv(g.size());
  {
    std::size_t idx = 0;
    for (std::size_t kk = 0; kk < g.dims[2]; ++kk) {
      double sz = fft_freq(kk, g.dims[2], g.spacing[2]);
      for (std::size_t j = 0; j < g.dims[1]; ++j) {
        double sy = fft_freq(j, g.dims[1], g.spacing[1]);
        for (std::size_t i = 0; i < g.dims[0]; ++i, ++idx) {
          double sx = fft_freq(i, g.dims[0], g.spacing[0]);
          double s2 = sx * sx + sy * sy + sz * sz;
          cplx zs = zeta.x * sx + zeta.y * sy + zeta.z * sz;
          cplx sigma0 = h * h * s2 - 2.0 * cplx(0, 1) * h * zs;
          pinv[idx] = 1.0 / (std::norm(sigma0) + lambda * (1.0 + h * h * s2));
        }
      }
    }
  }
  CplxBuffer buf(g.size());
  auto precond = [&](const std::vector<cplx>& r, std::vector<cplx>& z) {
    for (std::size_t n = 0; n < g.size(); ++n) buf[n] = r[n];
    fft3_forward(g.dims, buf.data());
    for (std::size_t n = 0; n < g.size(); ++n) buf[n] *= pinv[n];
    fft3_backward(g.dims, buf.data());
    z.resize(g.size());
    double scale = 1.0 / double(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) z[n] = buf[n] * scale;
  };

  // PCG, fixed-order reductions
  std::vector<cplx> x(g.size(), cplx(0.0)), r = rhs, z, p, Ap;
  precond(r, z);
  p = z;
  auto dotc = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += std::conj(a[n]) * b[n];
    return s;
  };
  double rhs_norm = std::sqrt(std::abs(dotc(rhs, rhs)));
  cplx rz = dotc(r, z);
  RemainderResult out;
  double rn = rhs_norm;
  std::size_t it = 0;
  for (; it < max_iter && rn > cg_tol * std::max(rhs_norm, 1e-300); ++it) {
    normal_apply(p, Ap);
    cplx alpha = rz / dotc(p, Ap);
    for (std::size_t n = 0; n < g.size(); ++n) {
      x[n] += alpha * p[n];
      r[n] -= alpha * Ap[n];
    }
    rn = std::sqrt(std::abs(dotc(r, r)));
    precond(r, z);
    cplx rz_new = dotc(r, z);
    cplx beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t n = 0; n < g.size(); ++n) p[n] = z[n] + beta * p[n];
  }
  out.iterations = it;
  out.cg_rel_residual = rhs_norm > 0 ? rn / rhs_norm : 0.0;

  out.r = ScalarField(g);
  out.r.v = std::move(x);
  ScalarField rf = out.r;
  VectorField gr = grad_spectral(rf);
  std::vector<double> mask = ball_mask(g, ball.center, ball.radius);
  double n0 = 0.0, n1 = 0.0, lza = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (mask[n] == 0.0) continue;
    n0 += std::norm(rf.v[n]);
    for (int c = 0; c < 3; ++c) n1 += std::norm(gr.v[c][n]);
    lza += std::norm(amp.Lza.v[n]);
  }
  double vol = g.cell_volume();
  out.h1scl_norm = std::sqrt((n0 + h * h * n1) * vol);
  double lza_norm = std::sqrt(lza * vol);
  out.solvability_constant = lza_norm > 0 ? h * out.h1scl_norm / lza_norm : 0.0;
  return out;
}

}  // namespace mst
