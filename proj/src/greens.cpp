#include "mst/greens.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mst/numerics.hpp"

namespace mst {

cplx green_eval(double k, Vec3 x, Vec3 y) {
  double r = norm(x - y);
  if (r == 0.0) throw std::invalid_argument("green_eval: singular at x = y");
  return std::exp(cplx(0.0, k * r)) / (4.0 * pi * r);
}

namespace {

// (e^z - 1)/z, stable near z = 0.
cplx cexpm1_ratio(cplx z) {
  if (std::abs(z) < 1e-5) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return (std::exp(z) - 1.0) / z;
}

double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

cplx truncated_green_symbol(double k, double T, double s) {
  // Int_0^T e^{ikr} sin(sr)/s dr  ==  iT [ (e^{i(k-s)T}-1)/(i(k-s)T) - e^{ikT} sinc(sT) ] / (s+k)
  const cplx i(0.0, 1.0);
  return i * T * (cexpm1_ratio(i * (k - s) * T) - std::exp(i * k * T) * sinc(s * T)) / (s + k);
}

GreenKernel::GreenKernel(const Grid3& grid, double k, double source_radius)
    : grid_(grid), k_(k) {
  if (!(k > 0.0)) throw std::invalid_argument("GreenKernel: k must be positive");
  auto ext = grid.extent();
  double half_diag =
      0.5 * std::sqrt(ext[0] * ext[0] + ext[1] * ext[1] + ext[2] * ext[2]);
  source_radius_ = source_radius > 0.0 ? source_radius : half_diag;
  // T covers every target-source distance; padding keeps the truncation shell and
  // all periodic images of the residual outside the physical box.
  trunc_radius_ = source_radius_ + half_diag + 2.0 * grid.max_spacing();
  for (int a = 0; a < 3; ++a) {
    double need = ext[a] + trunc_radius_ + 2.0 * grid.spacing[a];
    std::size_t m = std::size_t(std::ceil(need / grid.spacing[a])) + 1;
    padded_[a] = fft_nice_size(std::max(m, grid.dims[a]));
  }
}

void GreenKernel::check_support(const ScalarField& phi) const {
  if (!phi.grid.same_layout(grid_))
    throw std::invalid_argument("GreenKernel: field grid mismatch");
  if (!phi.support)
    throw std::invalid_argument("GreenKernel: source needs compact-support metadata");
  double d = norm(phi.support->center - grid_.center()) + phi.support->radius;
  if (d > source_radius_ + 1e-12)
    throw std::invalid_argument(
        "GreenKernel: source support exceeds the kernel's source radius; rebuild with "
        "source_radius >= " +
        std::to_string(d));
}

void GreenKernel::embed(const std::vector<cplx>& v, CplxBuffer& buf) const {
  buf.zero();
  for (std::size_t k = 0; k < grid_.dims[2]; ++k)
    for (std::size_t j = 0; j < grid_.dims[1]; ++j) {
      const cplx* src = &v[grid_.index(0, j, k)];
      cplx* dst = &buf[(k * padded_[1] + j) * padded_[0]];
      for (std::size_t i = 0; i < grid_.dims[0]; ++i) dst[i] = src[i];
    }
}

ScalarField GreenKernel::extract(const CplxBuffer& buf) const {
  ScalarField out(grid_);
  double scale = 1.0 / double(padded_[0] * padded_[1] * padded_[2]);
  for (std::size_t k = 0; k < grid_.dims[2]; ++k)
    for (std::size_t j = 0; j < grid_.dims[1]; ++j) {
      const cplx* src = &buf[(k * padded_[1] + j) * padded_[0]];
      cplx* dst = &out.v[grid_.index(0, j, k)];
      for (std::size_t i = 0; i < grid_.dims[0]; ++i) dst[i] = scale * src[i];
    }
  return out;
}

ScalarField GreenKernel::apply(const ScalarField& phi) const {
  check_support(phi);
  return apply_raw(phi.v);
}

ScalarField GreenKernel::apply_raw(const std::vector<cplx>& v) const {
  CplxBuffer buf(padded_[0] * padded_[1] * padded_[2]);
  embed(v, buf);
  fft3_forward(padded_, buf.data());
  std::size_t idx = 0;
  for (std::size_t kk = 0; kk < padded_[2]; ++kk) {
    double sz = fft_freq(kk, padded_[2], grid_.spacing[2]);
    for (std::size_t j = 0; j < padded_[1]; ++j) {
      double sy = fft_freq(j, padded_[1], grid_.spacing[1]);
      for (std::size_t i = 0; i < padded_[0]; ++i, ++idx) {
        double sx = fft_freq(i, padded_[0], grid_.spacing[0]);
        double s = std::sqrt(sx * sx + sy * sy + sz * sz);
        buf[idx] *= truncated_green_symbol(k_, trunc_radius_, s);
      }
    }
  }
  fft3_backward(padded_, buf.data());
  return extract(buf);
}

GreenKernel::FieldWithGrad GreenKernel::apply_with_grad(const ScalarField& phi) const {
  check_support(phi);
  return apply_raw_with_grad(phi.v);
}

ScalarField GreenKernel::helmholtz_residual(const ScalarField& phi) const {
  check_support(phi);
  CplxBuffer buf(padded_[0] * padded_[1] * padded_[2]);
  embed(phi.v, buf);
  fft3_forward(padded_, buf.data());
  std::size_t idx = 0;
  for (std::size_t kk = 0; kk < padded_[2]; ++kk) {
    double sz = fft_freq(kk, padded_[2], grid_.spacing[2]);
    for (std::size_t j = 0; j < padded_[1]; ++j) {
      double sy = fft_freq(j, padded_[1], grid_.spacing[1]);
      for (std::size_t i = 0; i < padded_[0]; ++i, ++idx) {
        double sx = fft_freq(i, padded_[0], grid_.spacing[0]);
        double s2 = sx * sx + sy * sy + sz * sz;
        double s = std::sqrt(s2);
        buf[idx] *= (s2 - k_ * k_) * truncated_green_symbol(k_, trunc_radius_, s) - 1.0;
      }
    }
  }
  fft3_backward(padded_, buf.data());
  return extract(buf);
}

GreenKernel::FieldWithGrad GreenKernel::apply_raw_with_grad(const std::vector<cplx>& v) const {
  std::size_t n = padded_[0] * padded_[1] * padded_[2];
  CplxBuffer hat(n);
  embed(v, hat);
  fft3_forward(padded_, hat.data());
  // hat <- G_T(s) * phi_hat, then u and the three gradient components.
  std::size_t idx = 0;
  for (std::size_t kk = 0; kk < padded_[2]; ++kk) {
    double sz = fft_freq(kk, padded_[2], grid_.spacing[2]);
    for (std::size_t j = 0; j < padded_[1]; ++j) {
      double sy = fft_freq(j, padded_[1], grid_.spacing[1]);
      for (std::size_t i = 0; i < padded_[0]; ++i, ++idx) {
        double sx = fft_freq(i, padded_[0], grid_.spacing[0]);
        double s = std::sqrt(sx * sx + sy * sy + sz * sz);
        hat[idx] *= truncated_green_symbol(k_, trunc_radius_, s);
      }
    }
  }
  FieldWithGrad out;
  CplxBuffer work(n);
  for (int c = 0; c < 4; ++c) {
    idx = 0;
    for (std::size_t kk = 0; kk < padded_[2]; ++kk) {
      double sz = fft_freq(kk, padded_[2], grid_.spacing[2]);
      for (std::size_t j = 0; j < padded_[1]; ++j) {
        double sy = fft_freq(j, padded_[1], grid_.spacing[1]);
        for (std::size_t i = 0; i < padded_[0]; ++i, ++idx) {
          if (c == 0) {
            work[idx] = hat[idx];
          } else {
            double s = c == 1 ? fft_freq(i, padded_[0], grid_.spacing[0])
                              : (c == 2 ? sy : sz);
            work[idx] = hat[idx] * cplx(0.0, s);
          }
        }
      }
    }
    fft3_backward(padded_, work.data());
    if (c == 0) {
      out.u = extract(work);
      out.grad = VectorField(grid_);
    } else {
      out.grad.v[c - 1] = extract(work).v;
    }
  }
  return out;
}

namespace {

struct SphereMesh {
  std::vector<double> theta, phi, w;  // w = sin(theta) dtheta dphi
  std::vector<Vec3> dir;
};

SphereMesh make_sphere_mesh(std::size_t n_theta, std::size_t n_phi) {
  SphereMesh m;
  double dth = pi / double(n_theta), dph = 2.0 * pi / double(n_phi);
  for (std::size_t it = 0; it < n_theta; ++it) {
    double th = (double(it) + 0.5) * dth;
    for (std::size_t ip = 0; ip < n_phi; ++ip) {
      double ph = double(ip) * dph;
      m.theta.push_back(th);
      m.phi.push_back(ph);
      m.w.push_back(std::sin(th) * dth * dph);
      m.dir.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
    }
  }
  return m;
}

bool sphere_fits(const Grid3& g, double r) {
  Vec3 c = g.center(), lo = g.box_min(), hi = g.box_max();
  for (int a = 0; a < 3; ++a)
    if (c[a] - r < lo[a] + g.spacing[a] || c[a] + r > hi[a] - g.spacing[a]) return false;
  return true;
}

}  // namespace

FarField far_field_extract(const ScalarField& u, double k, double r_inner, double r_outer,
                           std::size_t n_theta, std::size_t n_phi) {
  if (r_outer - r_inner < 2.0 * u.grid.max_spacing())
    throw std::invalid_argument("far_field_extract: radii must be >= 2 grid cells apart");
  if (!sphere_fits(u.grid, r_outer))
    throw std::invalid_argument("far_field_extract: outer sphere does not fit in the grid");
  SphereMesh mesh = make_sphere_mesh(n_theta, n_phi);
  FarField ff;
  ff.theta = mesh.theta;
  ff.phi = mesh.phi;
  ff.directions = mesh.dir;
  ff.weights = mesh.w;
  Vec3 c = u.grid.center();
  const cplx i(0.0, 1.0);
  for (std::size_t d = 0; d < mesh.dir.size(); ++d) {
    cplx m1 = r_inner * std::exp(-i * k * r_inner) *
              sample_tricubic(u, c + r_inner * mesh.dir[d]);
    cplx m2 = r_outer * std::exp(-i * k * r_outer) *
              sample_tricubic(u, c + r_outer * mesh.dir[d]);
    // m(r) = a + c1/r: eliminate the 1/r term with the two radii.
    cplx c1 = (m1 - m2) / (1.0 / r_inner - 1.0 / r_outer);
    ff.amplitude.push_back(m2 - c1 / r_outer);
    ff.remainder.push_back(std::abs(c1) / r_outer);
  }
  return ff;
}

void write_far_field_csv(const std::string& path, const FarField& ff) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_far_field_csv: cannot open " + path);
  os << "# far-field pattern; theta,phi in radians, ISO spherical convention (theta from +z)\n";
  os << "theta,phi,re_a,im_a\n";
  char line[128];
  for (std::size_t i = 0; i < ff.amplitude.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", ff.theta[i], ff.phi[i],
                  ff.amplitude[i].real(), ff.amplitude[i].imag());
    os << line;
  }
}

std::vector<RadiationRecord> radiation_monitor(const ScalarField& u, double k,
                                               const std::vector<double>& radii,
                                               std::size_t n_theta, std::size_t n_phi) {
  SphereMesh mesh = make_sphere_mesh(n_theta, n_phi);
  Vec3 c = u.grid.center();
  double dr = u.grid.max_spacing();
  std::vector<RadiationRecord> out;
  const cplx i(0.0, 1.0);
  for (double r : radii) {
    RadiationRecord rec;
    rec.radius = r;
    if (!sphere_fits(u.grid, r + dr)) {
      rec.truncated = true;
      out.push_back(rec);
      continue;
    }
    double nu = 0, nd_out = 0, nd_in = 0;
    for (std::size_t d = 0; d < mesh.dir.size(); ++d) {
      cplx uc = sample_tricubic(u, c + r * mesh.dir[d]);
      cplx up = sample_tricubic(u, c + (r + dr) * mesh.dir[d]);
      cplx um = sample_tricubic(u, c + (r - dr) * mesh.dir[d]);
      cplx dn = (up - um) / (2.0 * dr);
      double w = mesh.w[d] * r * r;
      nu += w * std::norm(uc);
      nd_out += w * std::norm(dn - i * k * uc);
      nd_in += w * std::norm(dn + i * k * uc);
    }
    rec.u_norm = std::sqrt(nu);
    rec.outgoing_defect = std::sqrt(nd_out);
    rec.incoming_defect = std::sqrt(nd_in);
    out.push_back(rec);
  }
  return out;
}

}  // namespace mst
