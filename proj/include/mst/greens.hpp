#pragma once

#include <string>
#include <vector>

#include "mst/fft.hpp"
#include "mst/field.hpp"
#include "mst/grid.hpp"

namespace mst {

// Outgoing free-space Green function e^{ik|x-y|} / (4 pi |x-y|).
cplx green_eval(double k, Vec3 x, Vec3 y);

// Fourier transform of the radially truncated kernel G0 * 1_{|x|<T}. Entire in s;
// evaluated in a uniformly stable form (the s = k singularity is removable).
cplx truncated_green_symbol(double k, double trunc_radius, double s);

// Resolvent convolution (-Delta - k^2 - i0)^{-1} realized as an FFT convolution
// with the truncated kernel on a padded grid. Exact (to quadrature) for sources
// inside the declared support ball and targets anywhere in the physical box: the
// truncation shell and all periodic images stay outside the box.
class GreenKernel {
 public:
  // source_radius: radius (about the grid center) inside which sources must live.
  // Defaults to the box half-diagonal, i.e. sources anywhere in the box.
  GreenKernel(const Grid3& grid, double k, double source_radius = -1.0);

  const Grid3& grid() const { return grid_; }
  double k() const { return k_; }
  double trunc_radius() const { return trunc_radius_; }
  std::array<std::size_t, 3> padded_dims() const { return padded_; }
  double source_radius() const { return source_radius_; }

  // u = G0 * phi on the grid. phi must carry support metadata within source_radius.
  ScalarField apply(const ScalarField& phi) const;

  struct FieldWithGrad {
    ScalarField u;
    VectorField grad;
  };
  // Also returns grad u = (grad G0) * phi via the gradient symbol.
  FieldWithGrad apply_with_grad(const ScalarField& phi) const;

  // Overloads taking a pre-assembled padded source (several compact terms summed);
  // caller asserts the combined support stays inside source_radius.
  ScalarField apply_raw(const std::vector<cplx>& grid_values) const;
  FieldWithGrad apply_raw_with_grad(const std::vector<cplx>& grid_values) const;

  // (-Delta - k^2)(G0 * phi) - phi on the grid, with the spectral Laplacian taken
  // on the padded torus where the convolution lives (the extracted window is not
  // periodic on the physical box, so differentiating there would ring).
  ScalarField helmholtz_residual(const ScalarField& phi) const;

 private:
  void check_support(const ScalarField& phi) const;
  void embed(const std::vector<cplx>& v, CplxBuffer& buf) const;
  ScalarField extract(const CplxBuffer& buf) const;

  Grid3 grid_;
  double k_;
  double source_radius_;
  double trunc_radius_;
  std::array<std::size_t, 3> padded_;
};

// Far-field pattern on a latitude-longitude sphere mesh (ISO convention, theta
// measured from +z).
struct FarField {
  std::vector<double> theta, phi;   // per direction
  std::vector<Vec3> directions;     // unit vectors
  std::vector<cplx> amplitude;      // a(x_hat)
  std::vector<double> remainder;    // two-radius estimate of the O(1/|x|^2) term
  std::vector<double> weights;      // sin(theta) dtheta dphi quadrature weights
};

// Estimates a(x_hat) by matching u = e^{ikr} a / r at two radii (Richardson in 1/r);
// u is sampled from the grid by tricubic interpolation.
FarField far_field_extract(const ScalarField& u, double k, double r_inner, double r_outer,
                           std::size_t n_theta = 24, std::size_t n_phi = 48);

void write_far_field_csv(const std::string& path, const FarField& ff);

struct RadiationRecord {
  double radius = 0;
  double u_norm = 0;        // ||u||_{L2(sphere)}
  double outgoing_defect = 0;  // ||d_n u - i k u||_{L2(sphere)}
  double incoming_defect = 0;  // ||d_n u + i k u||_{L2(sphere)}
  bool truncated = false;   // radius did not fit in the grid
};

// Sphere norms along a radius ladder; outgoing fields show bounded u_norm and a
// decaying outgoing_defect. Normal derivative by centered radial differences.
std::vector<RadiationRecord> radiation_monitor(const ScalarField& u, double k,
                                               const std::vector<double>& radii,
                                               std::size_t n_theta = 24, std::size_t n_phi = 48);

}  // namespace mst
