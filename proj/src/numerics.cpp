#include "mst/numerics.hpp"

#include <algorithm>
#include <stdexcept>

namespace mst {

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_loglog_slope: need >= 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("fit_loglog_slope: samples must be positive");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Extrapolation richardson_extrapolate(const std::vector<double>& h, const std::vector<cplx>& m,
                                     double order) {
  if (h.size() != m.size() || h.size() < 2)
    throw std::invalid_argument("richardson_extrapolate: need >= 2 ladder points");
  Extrapolation out;

  std::vector<std::size_t> ord(h.size());
  for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });

  // classify the ladder: power-law sequences move monotonically toward the
  // limit; oscillatory perturbations (cross phases) reverse direction
  bool oscillatory = false;
  for (std::size_t i = 2; i < ord.size(); ++i) {
    cplx d0 = m[ord[i - 1]] - m[ord[i - 2]];
    cplx d1 = m[ord[i]] - m[ord[i - 1]];
    if ((d1 * std::conj(d0)).real() < 0.0) oscillatory = true;
  }
  double first_gap = std::abs(m[ord[1]] - m[ord[0]]);
  double last_gap = std::abs(m[ord.back()] - m[ord[ord.size() - 2]]);
  // nonconvergence: the step size stopped shrinking
  if (ord.size() >= 3 && last_gap > 2.0 * first_gap + 1e-14) out.converged = false;

  if (oscillatory) {
    // fitting a power law through a decaying oscillation amplifies it; the
    // smallest-h evaluation is the better estimate of the limit
    out.limit = m[ord.back()];
    double scale = 0.0;
    for (const cplx& z : m) scale = std::max(scale, std::abs(z));
    out.fit_residual = scale > 0 ? last_gap / scale : last_gap;
    return out;
  }

  // LSQ fit of m = m* + c * h^order
  double s1 = double(h.size()), st = 0, stt = 0;
  cplx sm = 0, smt = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double t = std::pow(h[i], order);
    st += t;
    stt += t * t;
    sm += m[i];
    smt += m[i] * t;
  }
  double det = s1 * stt - st * st;
  out.limit = (sm * stt - smt * st) / det;
  cplx c = (s1 * smt - sm * st) / det;
  double res = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    res += std::norm(m[i] - out.limit - c * std::pow(h[i], order));
    scale += std::norm(m[i]);
  }
  out.fit_residual = scale > 0 ? std::sqrt(res / scale) : std::sqrt(res);
  return out;
}

namespace {

inline double cubic_kernel(double t, const cplx* p, cplx& out) {
  // Catmull-Rom through p[0..3] at parameter t in [0,1] between p[1] and p[2].
  out = p[1] + 0.5 * t *
                   (p[2] - p[0] +
                    t * (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3] +
                         t * (3.0 * (p[1] - p[2]) + p[3] - p[0])));
  return t;
}

template <typename Get>
cplx tricubic_impl(const Grid3& g, Vec3 p, Get get) {
  double fx = (p.x - g.origin[0]) / g.spacing[0];
  double fy = (p.y - g.origin[1]) / g.spacing[1];
  double fz = (p.z - g.origin[2]) / g.spacing[2];
  // One-cell slack: positions up to half a cell outside still read as border values.
  if (fx < -0.5 || fy < -0.5 || fz < -0.5 || fx > double(g.dims[0]) - 0.5 ||
      fy > double(g.dims[1]) - 0.5 || fz > double(g.dims[2]) - 0.5)
    return cplx(0.0);
  auto base = [](double f, double& t) {
    std::ptrdiff_t i = std::ptrdiff_t(std::floor(f));
    t = f - double(i);
    return i;
  };
  double tx, ty, tz;
  std::ptrdiff_t ix = base(fx, tx);
  std::ptrdiff_t iy = base(fy, ty);
  std::ptrdiff_t iz = base(fz, tz);
  auto clamp = [](std::ptrdiff_t i, std::size_t n) {
    if (i < 0) return std::size_t(0);
    if (i >= std::ptrdiff_t(n)) return n - 1;
    return std::size_t(i);
  };
  cplx zi[4], yi[4], xi[4];
  for (int dz = -1; dz <= 2; ++dz) {
    std::size_t kk = clamp(iz + dz, g.dims[2]);
    for (int dy = -1; dy <= 2; ++dy) {
      std::size_t jj = clamp(iy + dy, g.dims[1]);
      for (int dx = -1; dx <= 2; ++dx)
        xi[dx + 1] = get(clamp(ix + dx, g.dims[0]), jj, kk);
      cubic_kernel(tx, xi, yi[dy + 1]);
    }
    cubic_kernel(ty, yi, zi[dz + 1]);
  }
  cplx out;
  cubic_kernel(tz, zi, out);
  return out;
}

}  // namespace

cplx sample_tricubic(const ScalarField& f, Vec3 p) {
  return tricubic_impl(f.grid, p, [&](std::size_t i, std::size_t j, std::size_t k) {
    return f.v[f.grid.index(i, j, k)];
  });
}

CVec3 sample_tricubic(const VectorField& f, Vec3 p) {
  CVec3 out;
  for (int c = 0; c < 3; ++c)
    out[c] = tricubic_impl(f.grid, p, [&](std::size_t i, std::size_t j, std::size_t k) {
      return f.v[c][f.grid.index(i, j, k)];
    });
  return out;
}

cplx sample_trilinear(const ScalarField& f, Vec3 p) {
  const Grid3& g = f.grid;
  double fx = (p.x - g.origin[0]) / g.spacing[0];
  double fy = (p.y - g.origin[1]) / g.spacing[1];
  double fz = (p.z - g.origin[2]) / g.spacing[2];
  if (fx < 0 || fy < 0 || fz < 0 || fx > double(g.dims[0] - 1) || fy > double(g.dims[1] - 1) ||
      fz > double(g.dims[2] - 1))
    return cplx(0.0);
  std::size_t i = std::min(std::size_t(fx), g.dims[0] - 2);
  std::size_t j = std::min(std::size_t(fy), g.dims[1] - 2);
  std::size_t k = std::min(std::size_t(fz), g.dims[2] - 2);
  double tx = fx - double(i), ty = fy - double(j), tz = fz - double(k);
  cplx c00 = f.at(i, j, k) * (1 - tx) + f.at(i + 1, j, k) * tx;
  cplx c10 = f.at(i, j + 1, k) * (1 - tx) + f.at(i + 1, j + 1, k) * tx;
  cplx c01 = f.at(i, j, k + 1) * (1 - tx) + f.at(i + 1, j, k + 1) * tx;
  cplx c11 = f.at(i, j + 1, k + 1) * (1 - tx) + f.at(i + 1, j + 1, k + 1) * tx;
  cplx c0 = c00 * (1 - ty) + c10 * ty;
  cplx c1 = c01 * (1 - ty) + c11 * ty;
  return c0 * (1 - tz) + c1 * tz;
}

namespace {

double lipschitz_impl(const Grid3& g, const std::vector<cplx>& v) {
  double m = 0.0;
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        std::size_t n = g.index(i, j, k);
        if (i + 1 < g.dims[0])
          m = std::max(m, std::abs(v[g.index(i + 1, j, k)] - v[n]) / g.spacing[0]);
        if (j + 1 < g.dims[1])
          m = std::max(m, std::abs(v[g.index(i, j + 1, k)] - v[n]) / g.spacing[1]);
        if (k + 1 < g.dims[2])
          m = std::max(m, std::abs(v[g.index(i, j, k + 1)] - v[n]) / g.spacing[2]);
      }
  return m;
}

}  // namespace

double lipschitz_estimate(const ScalarField& f) { return lipschitz_impl(f.grid, f.v); }
double lipschitz_estimate(const VectorField& f) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) m = std::max(m, lipschitz_impl(f.grid, f.v[c]));
  return m;
}

}  // namespace mst
