#include "mst/recon.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <algorithm>
#include <mutex>
#include <random>
#include <thread>

#include "mst/fft.hpp"
#include "mst/numerics.hpp"

namespace mst {

namespace {

// Padded-FFT transform of one component: v(xi) = h^3 e^{i xi . x0} BackFFT[f].
void sampled_transform(const Grid3& g, const std::vector<cplx>& f, const FourierLattice& lat,
                       std::vector<cplx>& out) {
  std::size_t M = std::size_t(std::llround(2.0 * pi / (lat.dxi * g.spacing[0])));
  std::array<std::size_t, 3> dims{M, M, M};
  CplxBuffer buf(M * M * M);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i)
        buf[(k * M + j) * M + i] = f[g.index(i, j, k)];
  fft3_backward(dims, buf.data());
  double vol = g.cell_volume();
  out.assign(lat.size(), cplx(0.0));
  for (std::size_t k = 0; k < lat.n; ++k)
    for (std::size_t j = 0; j < lat.n; ++j)
      for (std::size_t i = 0; i < lat.n; ++i) {
        std::ptrdiff_t half = std::ptrdiff_t(lat.n / 2);
        auto wrap = [&](std::size_t m) {
          std::ptrdiff_t mm = std::ptrdiff_t(m) - half;
          return std::size_t(mm < 0 ? mm + std::ptrdiff_t(M) : mm);
        };
        Vec3 xi = lat.node(i, j, k);
        cplx phase = std::exp(cplx(0, dot(xi, {g.origin[0], g.origin[1], g.origin[2]})));
        out[lat.index(i, j, k)] = vol * phase * buf[(wrap(k) * M + wrap(j)) * M + wrap(i)];
      }
}

FourierLattice make_lattice(const Grid3& g, std::size_t dual_n, double xi_max) {
  double h = g.spacing[0];
  if (std::abs(g.spacing[1] - h) > 1e-12 || std::abs(g.spacing[2] - h) > 1e-12)
    throw std::invalid_argument("oracle_samples: isotropic grid spacing required");
  if (xi_max <= 0.0) xi_max = 0.9 * pi / h;
  double dxi_target = 2.0 * xi_max / double(dual_n);
  std::size_t M = fft_nice_size(std::max<std::size_t>(
      g.dims[0], std::size_t(std::ceil(2.0 * pi / (dxi_target * h)))));
  FourierLattice lat;
  lat.n = dual_n;
  lat.dxi = 2.0 * pi / (double(M) * h);
  return lat;
}

void mask_axis(FourierSampleSet& s) {
  s.axis_mask.assign(s.lattice.size(), 0);
  s.flagged.assign(s.lattice.size(), 0);
  std::size_t half = s.lattice.n / 2;
  for (std::size_t k = 0; k < s.lattice.n; ++k)
    s.axis_mask[s.lattice.index(half, half, k)] = 1;
}

}  // namespace

FourierSampleSet oracle_samples(const VectorField& diff_ext, std::size_t dual_n, double xi_max) {
  FourierSampleSet s;
  s.lattice = make_lattice(diff_ext.grid, dual_n, xi_max);
  s.rank = 3;
  for (int c = 0; c < 3; ++c) sampled_transform(diff_ext.grid, diff_ext.v[c], s.lattice, s.v[c]);
  mask_axis(s);
  return s;
}

FourierSampleSet oracle_samples(const ScalarField& diff_ext, std::size_t dual_n, double xi_max) {
  FourierSampleSet s;
  s.lattice = make_lattice(diff_ext.grid, dual_n, xi_max);
  s.rank = 1;
  sampled_transform(diff_ext.grid, diff_ext.v, s.lattice, s.v[0]);
  mask_axis(s);
  return s;
}

cplx fourier_sample_direct(const ScalarField& f, Vec3 xi) {
  const Grid3& g = f.grid;
  cplx acc = 0.0;
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        cplx val = f.v[g.index(i, j, k)];
        if (val == cplx(0.0)) continue;
        acc += val * std::exp(cplx(0, dot(xi, g.node(i, j, k))));
      }
  return acc * g.cell_volume();
}

CVec3 fourier_sample_direct(const VectorField& f, Vec3 xi) {
  CVec3 out;
  for (int c = 0; c < 3; ++c) out[c] = fourier_sample_direct(f.component(c), xi);
  return out;
}

cplx pairing_integral(const ScalarField& u1, const VectorField& grad_u1, const ScalarField& u2,
                      const VectorField& grad_u2, const VectorField& A1, const VectorField& A2,
                      const ScalarField& q1, const ScalarField& q2, SupportBall ball,
                      const PairingOptions& opt) {
  const Grid3& g = u1.grid;
  if (!g.mirror_ready()) throw std::invalid_argument("pairing_integral: mirror grid required");
  std::size_t kp = g.plane_k();

  // trace admissibility on l = plane cap of the ball
  double tr1 = 0, tr2 = 0, n1 = 0, n2 = 0;
  for (std::size_t k = 0; k <= kp; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        if (norm(g.node(i, j, k) - ball.center) > ball.radius) continue;
        std::size_t n = g.index(i, j, k);
        if (k == kp) {
          tr1 += std::norm(u1.v[n]);
          tr2 += std::norm(u2.v[n]);
        }
        n1 += std::norm(u1.v[n]);
        n2 += std::norm(u2.v[n]);
      }
  double cell = g.cell_volume();
  double plane_cell = g.spacing[0] * g.spacing[1];
  if (std::sqrt(tr1 * plane_cell) > opt.trace_tol * std::sqrt(n1 * cell) ||
      std::sqrt(tr2 * plane_cell) > opt.trace_tol * std::sqrt(n2 * cell))
    throw std::invalid_argument("pairing_integral: factors violate the zero-trace condition on l");

  // Kaiser taper in x3 over [-window_depth, 0]; unity below
  auto window = [&](double z) {
    if (opt.window_depth <= 0.0) return 1.0;
    if (z <= -opt.window_depth) return 1.0;
    double t = -z / opt.window_depth;  // 0 at plane, 1 at depth
    double b = opt.kaiser_beta;
    return std::cyl_bessel_i(0.0, b * std::sqrt(std::max(0.0, 1.0 - (1.0 - t) * (1.0 - t)))) /
           std::cyl_bessel_i(0.0, b);
  };

  const cplx I(0, 1);
  cplx acc = 0.0;
  for (std::size_t k = 0; k <= kp; ++k) {
    double z = g.origin[2] + double(k) * g.spacing[2];
    double wz = window(z) * (k == kp ? 0.5 : 1.0);  // trapezoid half-weight on l
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        if (norm(g.node(i, j, k) - ball.center) > ball.radius) continue;
        std::size_t n = g.index(i, j, k);
        CVec3 dA{A2.v[0][n] - A1.v[0][n], A2.v[1][n] - A1.v[1][n], A2.v[2][n] - A1.v[2][n]};
        if (dA.x == cplx(0.0) && dA.y == cplx(0.0) && dA.z == cplx(0.0) &&
            q1.v[n] == q2.v[n])
          continue;
        cplx u2c = std::conj(u2.v[n]);
        CVec3 gu2c{std::conj(grad_u2.v[0][n]), std::conj(grad_u2.v[1][n]),
                   std::conj(grad_u2.v[2][n])};
        cplx term1 = 0.0;
        for (int c = 0; c < 3; ++c)
          term1 += dA[c] * (grad_u1.v[c][n] * u2c - u1.v[n] * gu2c[c]);
        cplx a1sq = A1.v[0][n] * A1.v[0][n] + A1.v[1][n] * A1.v[1][n] + A1.v[2][n] * A1.v[2][n];
        cplx a2sq = A2.v[0][n] * A2.v[0][n] + A2.v[1][n] * A2.v[1][n] + A2.v[2][n] * A2.v[2][n];
        cplx term2 = (a1sq - a2sq + q1.v[n] - q2.v[n]) * u1.v[n] * u2c;
        acc += wz * (I * term1 + term2);
      }
  }
  return acc * cell;
}

namespace {

struct CGOPairContext {
  CGOSpec spec;
  Amplitude amp1, amp2;
};

// Builds the e^{-Psi}-corrected CGO pair for one (xi, h): Psi = Phi1^0 + conj(Phi2^0)
// from unmollified transports (shared across the ladder), Phi_j(h) mollified.
class MeasurementJob {
 public:
  MeasurementJob(const VectorField& A1, const ScalarField& q1, const VectorField& A2,
                 const ScalarField& q2, double k, SupportBall ball, Vec3 xi)
      : A1_(A1), q1_(q1), A2_(A2), q2_(q2), k_(k), ball_(ball), xi_(xi) {
    auto [g1, g2] = special_gammas(xi);
    g1_ = g1;
    g2_ = g2;
    ExponentBundle phi1_0 = solve_transport(A1_, g1_, g2_, 0.0, nullptr, false);
    ExponentBundle phi2_0 = solve_transport(A2_, -g1_, g2_, 0.0, nullptr, false);
    // Psi = Phi1^0 + conj(Phi2^0)
    psi_ = phi1_0;
    const Grid3& g = A1_.grid;
    for (std::size_t n = 0; n < g.size(); ++n) {
      psi_.val.v[n] += std::conj(phi2_0.val.v[n]);
      for (int c = 0; c < 3; ++c) psi_.grad.v[c][n] += std::conj(phi2_0.grad.v[c][n]);
      psi_.lap.v[n] += std::conj(phi2_0.lap.v[n]);
    }
  }

  // q2 enters the adjoint factor conjugated.
  cplx pairing_at(double h, double g_threshold, const PairingOptions& popt) const {
    CGOSpec spec = make_zeta_pair(h, xi_, g1_, g2_);
    ExponentBundle phi1 = solve_transport(A1_, g1_, g2_, spec.eps, nullptr, false);
    ExponentBundle phi2 = solve_transport(A2_, -g1_, g2_, spec.eps, nullptr, false);
    ScalarField q2c(q2_.grid);
    for (std::size_t n = 0; n < q2c.grid.size(); ++n) q2c.v[n] = std::conj(q2_.v[n]);
    Amplitude amp1 =
        build_amplitude(spec, 1, A1_, q1_, k_, phi1, &psi_, ball_, g_threshold);
    Amplitude amp2 = build_amplitude(spec, 2, A2_, q2c, k_, phi2, nullptr, ball_);
    ReflectedPair pr = reflected_pair(spec, amp1, amp2);
    return pairing_integral(pr.u1, pr.grad_u1, pr.u2, pr.grad_u2, A1_, A2_, q1_, q2_, ball_,
                            popt);
  }

  double g_transport_residual() const {
    // || zeta0 . grad Psi ||_inf over the ball (zero when A1 = A2)
    CVec3 z0{cplx(g1_.x, g2_.x), cplx(g1_.y, g2_.y), cplx(g1_.z, g2_.z)};
    const Grid3& g = A1_.grid;
    std::vector<double> mask = ball_mask(g, ball_.center, ball_.radius);
    double worst = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (mask[n] == 0.0) continue;
      cplx r = z0.x * psi_.grad.v[0][n] + z0.y * psi_.grad.v[1][n] + z0.z * psi_.grad.v[2][n];
      worst = std::max(worst, std::abs(r));
    }
    return worst;
  }

 private:
  const VectorField& A1_;
  const ScalarField& q1_;
  const VectorField& A2_;
  const ScalarField& q2_;
  double k_;
  SupportBall ball_;
  Vec3 xi_;
  Vec3 g1_, g2_;
  ExponentBundle psi_;
};

std::vector<double> effective_ladder(const MeasurementOptions& opt, Vec3 xi) {
  if (opt.adapt_cross_scale <= 0.0) return opt.h_ladder;
  auto [g1, g2] = special_gammas(xi);
  (void)g1;
  double lo = opt.h_floor > 0.0 ? opt.h_floor : opt.h_ladder.back();
  double hi = opt.h_ladder.front() / 1.5;
  double t = 0.55 * opt.adapt_cross_scale * std::abs(g2.z);
  t = std::min(std::max(t, lo), std::max(hi, lo * 1.01));
  return {1.5 * t, 1.22 * t, t};
}

MeasuredSample extrapolate_ladder(const std::vector<double>& ladder, const std::vector<cplx>& m,
                                  double order, cplx divisor) {
  Extrapolation ex = richardson_extrapolate(ladder, m, order);
  MeasuredSample out;
  out.value = ex.limit / divisor;
  out.flagged = !ex.converged;
  out.fit_residual = ex.fit_residual;
  return out;
}

}  // namespace

MeasuredSample measurement_sample_A(const VectorField& A1_ext, const ScalarField& q1_ext,
                                    const VectorField& A2_ext, const ScalarField& q2_ext,
                                    double k, SupportBall ball, Vec3 xi,
                                    const MeasurementOptions& opt) {
  MeasurementJob job(A1_ext, q1_ext, A2_ext, q2_ext, k, ball, xi);
  std::vector<double> ladder = effective_ladder(opt, xi);
  std::vector<cplx> m;
  // g = e^{-Psi} is only a formal correction here (zeta0 . grad Psi != 0 when the
  // magnetic potentials differ); no transport threshold applies
  for (double h : ladder)
    m.push_back(h * job.pairing_at(h, std::numeric_limits<double>::infinity(), opt.pairing));
  return extrapolate_ladder(ladder, m, opt.extrapolation_order, cplx(0.0, 2.0));
}

MeasuredSample measurement_sample_q(const VectorField& A_ext, const ScalarField& q1_ext,
                                    const ScalarField& q2_ext, double k, SupportBall ball,
                                    Vec3 xi, const MeasurementOptions& opt) {
  MeasurementJob job(A_ext, q1_ext, A_ext, q2_ext, k, ball, xi);
  // aligned pair: the amplitude correction must satisfy the transport condition
  double gres = job.g_transport_residual();
  double thresh = 1e-2 * std::max(1.0, linf_norm(A_ext));
  if (gres > thresh)
    throw std::invalid_argument("measurement_sample_q: g = e^{-Psi} fails the transport condition");
  std::vector<double> ladder = effective_ladder(opt, xi);
  std::vector<cplx> m;
  for (double h : ladder) m.push_back(job.pairing_at(h, thresh, opt.pairing));
  return extrapolate_ladder(ladder, m, opt.extrapolation_order, cplx(1.0, 0.0));
}

namespace {

void fill_axis(FourierSampleSet& s, double& fill_error) {
  // 4th-order transverse interpolation onto the masked column, averaged over the
  // two transverse axes: (4(f(+1)+f(-1)) - (f(+2)+f(-2))) / 6 per axis.
  const FourierLattice& lat = s.lattice;
  std::size_t half = lat.n / 2;
  double err = 0.0, scale = 0.0;
  for (int c = 0; c < s.rank; ++c)
    for (const cplx& z : s.v[c]) scale = std::max(scale, std::abs(z));
  for (std::size_t k = 0; k < lat.n; ++k) {
    std::size_t n0 = lat.index(half, half, k);
    for (int c = 0; c < s.rank; ++c) {
      cplx fx = (4.0 * (s.v[c][lat.index(half + 1, half, k)] +
                        s.v[c][lat.index(half - 1, half, k)]) -
                 (s.v[c][lat.index(half + 2, half, k)] +
                  s.v[c][lat.index(half - 2, half, k)])) /
                6.0;
      cplx fy = (4.0 * (s.v[c][lat.index(half, half + 1, k)] +
                        s.v[c][lat.index(half, half - 1, k)]) -
                 (s.v[c][lat.index(half, half + 2, k)] +
                  s.v[c][lat.index(half, half - 2, k)])) /
                6.0;
      cplx fill = 0.5 * (fx + fy);
      err = std::max(err, std::abs(fill - s.v[c][n0]));
      s.v[c][n0] = fill;
    }
  }
  fill_error = scale > 0 ? err / scale : 0.0;
}

double check_coverage(const FourierSampleSet& s) {
  std::size_t ok = 0;
  for (std::size_t n = 0; n < s.lattice.size(); ++n)
    if (!s.flagged[n] || s.axis_mask[n]) ++ok;
  return double(ok) / double(s.lattice.size());
}

// f(x_j) = (dxi/2pi)^3 sum_m w_m e^{-i x_j . xi_m} on an n^3 grid with period
// 2 pi / dxi centered at `center`.
void inverse_lattice_transform(const FourierLattice& lat, const std::vector<cplx>& w,
                               Vec3 center, std::vector<cplx>& out, Grid3& grid_out) {
  std::size_t n = lat.n;
  double L = 2.0 * pi / lat.dxi;
  double hr = L / double(n);
  Vec3 x0 = center - Vec3{0.5 * L, 0.5 * L, 0.5 * L};
  grid_out = Grid3({x0.x, x0.y, x0.z}, {hr, hr, hr}, {n, n, n});
  CplxBuffer buf(n * n * n);
  std::ptrdiff_t half = std::ptrdiff_t(n / 2);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        Vec3 xi = lat.node(i, j, k);
        cplx val = w[lat.index(i, j, k)] * std::exp(cplx(0, -dot(xi, x0)));
        auto wrap = [&](std::size_t m) {
          std::ptrdiff_t mm = std::ptrdiff_t(m) - half;
          return std::size_t(mm < 0 ? mm + std::ptrdiff_t(n) : mm);
        };
        buf[(wrap(k) * n + wrap(j)) * n + wrap(i)] = val;
      }
  std::array<std::size_t, 3> dims{n, n, n};
  fft3_forward(dims, buf.data());  // e^{-i 2pi j m / n}
  double scale = std::pow(lat.dxi / (2.0 * pi), 3);
  out.resize(n * n * n);
  Grid3& g = grid_out;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        out[g.index(i, j, k)] = scale * buf[(k * n + j) * n + i];
}

}  // namespace

CurlRecovery recover_curl(const FourierSampleSet& samples, Vec3 center) {
  if (samples.rank != 3) throw std::invalid_argument("recover_curl: vector samples required");
  CurlRecovery out;
  out.coverage = check_coverage(samples);
  if (out.coverage < 0.9)
    throw std::invalid_argument("recover_curl: sample coverage below 90%");
  FourierSampleSet s = samples;
  fill_axis(s, out.axis_fill_error);
  const FourierLattice& lat = s.lattice;
  // w = -i xi x v
  std::array<std::vector<cplx>, 3> w;
  for (int c = 0; c < 3; ++c) w[c].assign(lat.size(), cplx(0.0));
  for (std::size_t k = 0; k < lat.n; ++k)
    for (std::size_t j = 0; j < lat.n; ++j)
      for (std::size_t i = 0; i < lat.n; ++i) {
        std::size_t n = lat.index(i, j, k);
        Vec3 xi = lat.node(i, j, k);
        CVec3 v{s.v[0][n], s.v[1][n], s.v[2][n]};
        const cplx mi(0, -1);
        w[0][n] = mi * (xi.y * v.z - xi.z * v.y);
        w[1][n] = mi * (xi.z * v.x - xi.x * v.z);
        w[2][n] = mi * (xi.x * v.y - xi.y * v.x);
      }
  Grid3 gout;
  out.curl = VectorField();
  std::array<std::vector<cplx>, 3> fields;
  for (int c = 0; c < 3; ++c) inverse_lattice_transform(lat, w[c], center, fields[c], gout);
  out.curl = VectorField(gout);
  for (int c = 0; c < 3; ++c) out.curl.v[c] = std::move(fields[c]);
  return out;
}

QRecovery recover_q_field(const FourierSampleSet& samples, Vec3 center) {
  if (samples.rank != 1) throw std::invalid_argument("recover_q_field: scalar samples required");
  QRecovery out;
  out.coverage = check_coverage(samples);
  std::size_t nf = 0;
  for (std::size_t n = 0; n < samples.lattice.size(); ++n)
    if (samples.flagged[n]) ++nf;
  out.flagged_fraction = double(nf) / double(samples.lattice.size());
  if (out.flagged_fraction > 0.1)
    throw std::invalid_argument("recover_q_field: more than 10% flagged samples");
  FourierSampleSet s = samples;
  fill_axis(s, out.axis_fill_error);
  Grid3 gout;
  std::vector<cplx> field;
  inverse_lattice_transform(s.lattice, s.v[0], center, field, gout);
  out.q = ScalarField(gout);
  out.q.v = std::move(field);
  return out;
}

ScalarField gauge_align(const VectorField& D_ext, SupportBall ball, double curl_tol) {
  const Grid3& g = D_ext.grid;
  VectorField curl = curl_spectral(D_ext);
  double rel = l2_norm(curl) / std::max(l2_norm(D_ext), 1e-300);
  if (rel > curl_tol)
    throw std::invalid_argument("gauge_align: curl certification failed (rel " +
                                std::to_string(rel) + ")");
  // psi_hat = -i s . D_hat / |s|^2 (Helmholtz projection onto gradients)
  std::size_t n = g.size();
  std::array<CplxBuffer, 3> hat{CplxBuffer(n), CplxBuffer(n), CplxBuffer(n)};
  for (int c = 0; c < 3; ++c) {
    for (std::size_t m = 0; m < n; ++m) hat[c][m] = D_ext.v[c][m];
    fft3_forward(g.dims, hat[c].data());
  }
  CplxBuffer psihat(n);
  std::size_t idx = 0;
  for (std::size_t kk = 0; kk < g.dims[2]; ++kk) {
    double sz = fft_freq(kk, g.dims[2], g.spacing[2]);
    for (std::size_t j = 0; j < g.dims[1]; ++j) {
      double sy = fft_freq(j, g.dims[1], g.spacing[1]);
      for (std::size_t i = 0; i < g.dims[0]; ++i, ++idx) {
        double sx = fft_freq(i, g.dims[0], g.spacing[0]);
        double s2 = sx * sx + sy * sy + sz * sz;
        if (s2 == 0.0) {
          psihat[idx] = 0.0;
          continue;
        }
        cplx sdot = sx * hat[0][idx] + sy * hat[1][idx] + sz * hat[2][idx];
        psihat[idx] = cplx(0, -1) * sdot / s2;
      }
    }
  }
  fft3_backward(g.dims, psihat.data());
  ScalarField psi(g);
  double scale = 1.0 / double(n);
  for (std::size_t m = 0; m < n; ++m) psi.v[m] = psihat[m] * scale;

  // shift so psi vanishes outside the ball, then zero it there exactly
  cplx ext_mean = 0.0;
  std::size_t count = 0;
  for (std::size_t kk = 0; kk < g.dims[2]; ++kk)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        if (norm(g.node(i, j, kk) - ball.center) <= ball.radius) continue;
        ext_mean += psi.v[g.index(i, j, kk)];
        ++count;
      }
  if (count > 0) ext_mean /= double(count);
  for (std::size_t kk = 0; kk < g.dims[2]; ++kk)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        std::size_t m = g.index(i, j, kk);
        if (norm(g.node(i, j, kk) - ball.center) <= ball.radius)
          psi.v[m] -= ext_mean;
        else
          psi.v[m] = 0.0;
      }
  psi.support = ball;
  return psi;
}

namespace {

template <typename Sampler>
void run_measurement_sweep(FourierSampleSet& s, std::size_t threads, Sampler sampler) {
  const FourierLattice& lat = s.lattice;
  std::vector<std::size_t> jobs;
  for (std::size_t n = 0; n < lat.size(); ++n)
    if (!s.axis_mask[n]) jobs.push_back(n);
  std::size_t nt = std::max<std::size_t>(1, threads);
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) break;
      sampler(jobs[j]);
    }
  };
  if (nt == 1) {
    worker();
  } else {
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
}

}  // namespace

ReconResult reconstruct(const Scenario& scenario, const ReconOptions& opt) {
  scenario.validate();
  ExtendedPotentials ext = extend_potentials(scenario);
  ext.A.support = SupportBall{scenario.ball.center, scenario.ball.radius};
  ext.q.support = ext.A.support;
  const Grid3& g = ext.A.grid;
  double k = scenario.k;
  SupportBall ball = scenario.ball;

  ReconResult out;

  // ---- curl stage: (A, q) against the zero background ----
  FourierSampleSet sA = oracle_samples(ext.A, opt.dual_n, opt.xi_max);
  if (!opt.oracle_mode) {
    // measurement lattice at desk scale
    FourierSampleSet sm;
    sm.lattice = make_lattice(g, opt.dual_n_measurement, opt.xi_max);
    sm.rank = 3;
    for (int c = 0; c < 3; ++c) sm.v[c].assign(sm.lattice.size(), cplx(0.0));
    mask_axis(sm);
    VectorField zeroA(g);
    zeroA.support = ball;
    ScalarField zeroq(g);
    FourierSampleSet oracle_small = oracle_samples(ext.A, opt.dual_n_measurement, opt.xi_max);
    // optional node subsampling for the consistency sweep
    if (opt.consistency_samples > 0) {
      std::mt19937_64 rng(12345);
      std::vector<std::size_t> all;
      for (std::size_t n = 0; n < sm.lattice.size(); ++n)
        if (!sm.axis_mask[n]) all.push_back(n);
      std::shuffle(all.begin(), all.end(), rng);
      for (std::size_t idx = opt.consistency_samples; idx < all.size(); ++idx)
        sm.axis_mask[all[idx]] = 1;  // skip by masking
    }
    std::size_t agree = 0, tested = 0;
    std::mutex mtx;
    run_measurement_sweep(sm, opt.threads, [&](std::size_t n) {
      std::size_t i = n % sm.lattice.n, j = (n / sm.lattice.n) % sm.lattice.n,
                  kk = n / (sm.lattice.n * sm.lattice.n);
      Vec3 xi = sm.lattice.node(i, j, kk);
      MeasuredSample ms =
          measurement_sample_A(zeroA, zeroq, ext.A, ext.q, k, ball, xi, opt.measurement);
      auto [g1, g2] = special_gammas(xi);
      CVec3 z0{cplx(g1.x, g2.x), cplx(g1.y, g2.y), cplx(g1.z, g2.z)};
      CVec3 ov{oracle_small.v[0][n], oracle_small.v[1][n], oracle_small.v[2][n]};
      cplx oracle_val = bdot(z0, ov);
      std::lock_guard<std::mutex> lock(mtx);
      ++tested;
      double budget = 0.02 * linf_norm(ext.A) + 0.1 * std::abs(oracle_val);
      if (std::abs(ms.value - oracle_val) <= budget && !ms.flagged) ++agree;
    });
    out.consistency = tested > 0 ? double(agree) / double(tested) : 1.0;
  }
  CurlRecovery rec = recover_curl(sA, ball.center);
  out.curl_field = rec.curl;
  out.axis_fill_error = rec.axis_fill_error;

  // truth: spectral curl of the extended potential, resampled on the recon grid
  VectorField truth_full = curl_spectral(ext.A);
  VectorField truth(rec.curl.grid);
  for (std::size_t kk = 0; kk < truth.grid.dims[2]; ++kk)
    for (std::size_t j = 0; j < truth.grid.dims[1]; ++j)
      for (std::size_t i = 0; i < truth.grid.dims[0]; ++i) {
        CVec3 w = sample_tricubic(truth_full, truth.grid.node(i, j, kk));
        std::size_t n = truth.grid.index(i, j, kk);
        truth.v[0][n] = w.x;
        truth.v[1][n] = w.y;
        truth.v[2][n] = w.z;
      }
  out.rel_err_curl = rel_l2_error(out.curl_field, truth);

  // ---- q stage: aligned pair (A, q) vs (A, 0) ----
  FourierSampleSet sq;
  double flagged = 0.0;
  if (opt.oracle_mode) {
    ScalarField qdiff(g);
    for (std::size_t n = 0; n < g.size(); ++n) qdiff.v[n] = -ext.q.v[n];  // q1 - q2 with q1 = 0
    sq = oracle_samples(qdiff, opt.dual_n, opt.xi_max);
  } else {
    sq.lattice = make_lattice(g, opt.dual_n_measurement, opt.xi_max);
    sq.rank = 1;
    sq.v[0].assign(sq.lattice.size(), cplx(0.0));
    mask_axis(sq);
    ScalarField zeroq(g);
    run_measurement_sweep(sq, opt.threads, [&](std::size_t n) {
      std::size_t i = n % sq.lattice.n, j = (n / sq.lattice.n) % sq.lattice.n,
                  kk = n / (sq.lattice.n * sq.lattice.n);
      Vec3 xi = sq.lattice.node(i, j, kk);
      MeasuredSample ms = measurement_sample_q(ext.A, zeroq, ext.q, k, ball, xi, opt.measurement);
      sq.v[0][n] = ms.value;
      if (ms.flagged) sq.flagged[n] = 1;
    });
  }
  QRecovery qr = recover_q_field(sq, ball.center);
  flagged = qr.flagged_fraction;
  out.q_field = qr.q;
  out.flagged_fraction = flagged;
  out.axis_fill_error = std::max(out.axis_fill_error, qr.axis_fill_error);

  ScalarField qtruth(qr.q.grid);
  for (std::size_t kk = 0; kk < qtruth.grid.dims[2]; ++kk)
    for (std::size_t j = 0; j < qtruth.grid.dims[1]; ++j)
      for (std::size_t i = 0; i < qtruth.grid.dims[0]; ++i) {
        // truth is q1~ - q2~ = -q~
        qtruth.v[qtruth.grid.index(i, j, kk)] =
            -sample_tricubic(ext.q, qtruth.grid.node(i, j, kk));
      }
  out.rel_err_q = rel_l2_error(out.q_field, qtruth);
  return out;
}

void write_recon_metrics_json(const std::string& path, const ReconResult& r) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_recon_metrics_json: cannot open " + path);
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "{\n  \"rel_err_curl\": %.17g,\n  \"rel_err_q\": %.17g,\n"
                "  \"flagged_fraction\": %.17g,\n  \"axis_fill_error\": %.17g,\n"
                "  \"consistency\": %.17g\n}\n",
                r.rel_err_curl, r.rel_err_q, r.flagged_fraction, r.axis_fill_error,
                r.consistency);
  os << buf;
}

}  // namespace mst
