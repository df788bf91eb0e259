#pragma once

#include <utility>

#include "mst/field.hpp"
#include "mst/grid.hpp"
#include "mst/numerics.hpp"

namespace mst {

enum class Parity { Even, Odd };

// Even/odd extension across x3 = 0. Input lives on the x3 <= 0 half grid with its
// top node layer on the plane; output lives on the mirror grid. Odd components must
// vanish on the plane (relative tolerance 1e-12), mirroring A3|_{x3=0} = 0.
ScalarField reflect_extend(const ScalarField& f, Parity parity);
VectorField reflect_extend(const VectorField& f, std::array<Parity, 3> parity);

// Odd extension for L^2 source terms: the plane layer takes the odd average
// (zero), and no vanishing requirement applies -- the extension may jump across
// the plane, which is admissible for sources.
ScalarField reflect_extend_source(const ScalarField& f);

// Restriction to x3 <= 0; exact inverse of reflect_extend on its image.
ScalarField restrict_to_half(const ScalarField& f);
VectorField restrict_to_half(const VectorField& f);

// Even/odd part with respect to x3 -> -x3 on a mirror-ready grid.
ScalarField parity_part(const ScalarField& f, Parity parity);

struct MollifyResult {
  VectorField sharp;  // A * psi_eps
  VectorField flat;   // A - sharp, exact node-wise
};

// Convolution with the compactly supported bump psi_eps, discretely normalized to
// unit mass. Requires eps >= 2 * max spacing and an eps margin between the stated
// support ball and the box faces (cyclic convolution must not wrap).
MollifyResult mollify(const VectorField& A, double eps);
ScalarField mollify_scalar(const ScalarField& f, double eps);

// ---- synthetic potential generators ----

// amplitude * exp(-|x-c|^2 / (2 sigma^2)), hard-zeroed outside support_radius and
// tapered by a smooth indicator so the support contract holds exactly.
ScalarField make_gaussian_bump(const Grid3& g, Vec3 center, double sigma, cplx amplitude,
                               double support_radius);
VectorField make_gaussian_bump_vec(const Grid3& g, Vec3 center, std::array<double, 3> sigma,
                                   std::array<cplx, 3> amplitude, double support_radius);

ScalarField make_smoothed_indicator(const Grid3& g, Vec3 center, double radius, double delta);

// Radial bump psi = amplitude * exp(-1/(1-(r/R)^2)) with its analytic gradient;
// realizes the A + grad(psi) gauges. psi = 0 outside R.
struct GradientFieldResult {
  VectorField grad_psi;
  ScalarField psi;
};
GradientFieldResult make_gradient_field(const Grid3& g, Vec3 center, double radius,
                                        double amplitude);

// Lipschitz tent |x| -> amplitude * max(0, 1 - |x-c|/R) per selected component.
VectorField make_tent_vec(const Grid3& g, Vec3 center, double radius,
                          std::array<double, 3> amplitude);

// Ball mask as quadrature weights (1 inside, 0 outside).
std::vector<double> ball_mask(const Grid3& g, Vec3 center, double radius);

}  // namespace mst
