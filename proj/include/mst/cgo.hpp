#pragma once

#include <optional>
#include <utility>

#include "mst/field.hpp"
#include "mst/fields.hpp"
#include "mst/grid.hpp"

namespace mst {

// Isotropic frequency pair for one (h, xi, gamma1, gamma2) choice:
//   zeta1 =  i h xi / 2 + gamma1 + i sqrt(1 - h^2 |xi|^2 / 4) gamma2
//   zeta2 = -i h xi / 2 - gamma1 + i sqrt(1 - h^2 |xi|^2 / 4) gamma2
// so that zeta_j . zeta_j = 0 and (zeta1 + conj(zeta2)) / h = i xi.
struct CGOSpec {
  double h = 0.1;
  Vec3 xi, gamma1, gamma2;
  CVec3 zeta1, zeta2;
  double eps = 0.0;  // mollification width, h^{1/3}

  // h -> 0 limits of the frequency directions: gamma1 + i gamma2 and its mirror.
  CVec3 zeta0_1() const { return {cplx(gamma1.x, gamma2.x), cplx(gamma1.y, gamma2.y), cplx(gamma1.z, gamma2.z)}; }
  CVec3 zeta0_2() const { return {cplx(-gamma1.x, gamma2.x), cplx(-gamma1.y, gamma2.y), cplx(-gamma1.z, gamma2.z)}; }
};

// Validates orthogonality (dots <= 1e-10), unit norms, gamma1.z = 0,
// gamma2.z != 0 and h |xi| < 2; eps = h^{1/3}.
CGOSpec make_zeta_pair(double h, Vec3 xi, Vec3 gamma1, Vec3 gamma2);

// The tangential frame used for recovery: gamma1 = (-xi2, xi1, 0)/|.|,
// gamma2 = xi x gamma1 / |.|. Rejects xi on the x3 axis.
std::pair<Vec3, Vec3> special_gammas(Vec3 xi);

// ---- 2D Cauchy transform ----

struct Field2 {
  std::array<double, 2> origin{0, 0};
  std::array<double, 2> spacing{1, 1};
  std::array<std::size_t, 2> dims{2, 2};
  std::vector<cplx> v;

  Field2() = default;
  Field2(std::array<double, 2> o, std::array<double, 2> d, std::array<std::size_t, 2> n)
      : origin(o), spacing(d), dims(n), v(n[0] * n[1], cplx(0.0)) {}
  std::size_t index(std::size_t i, std::size_t j) const { return j * dims[0] + i; }
};

// u = (1/pi) Int f(x - s) / (s1 + i s2) ds: the decay-normalized inverse of
// d/dzbar = (d1 + i d2)/2 (so dzbar u = f). FFT convolution with the min-image
// sampled kernel on a 2x padded grid; the singular cell takes its cell average 0.
// Rejects inputs with nonzero values on the 2-cell border ring.
Field2 cauchy_transform(const Field2& f);

// ---- transport solutions ----

// Phi with consistent first and second derivatives (all computed through the
// same slice-wise Cauchy route, so they differentiate one discrete object).
struct ExponentBundle {
  ScalarField val;
  VectorField grad;
  ScalarField lap;
};

struct TransportDiagnostics {
  double transport_residual_sup = 0.0;  // || zeta0 . grad Phi + i zeta0 . A ||_inf on supp A
  double slice_padding = 0.0;           // in-frame grid half extent
  double mollifier_eps = 0.0;
};

// Solves zeta0 . grad Phi = -i zeta0 . A_sharp slice-wise in the rotated frame
// (alpha, beta, alpha x beta) and resamples back by tricubic interpolation.
// mollify_eps > 0 applies the bump mollifier first; 0 uses A as given (the
// unmollified Phi^0 limit). A must be real with compact-support metadata.
// with_lap = false skips the Laplacian bundle (the identity pairing only needs
// values and gradients); the lap field is then zero.
ExponentBundle solve_transport(const VectorField& A, Vec3 alpha, Vec3 beta, double mollify_eps,
                               TransportDiagnostics* diag = nullptr, bool with_lap = true);

// ---- amplitudes ----

struct Amplitude {
  ScalarField a;        // g e^Phi
  VectorField grad_a;
  ScalarField Lza;      // e^{-x.zeta/h} h^2 (L_{A,q} - k^2) e^{x.zeta/h} a
  double residual_sup = 0.0;  // sup over the support ball of |Lza|
  double g_residual = 0.0;    // || zeta0 . grad(log g) ||_inf over the ball
};

// a = g e^Phi with g = e^{-Psi} optional (pass minus_psi = the Psi bundle); g
// must satisfy the transport condition zeta0 . grad g = 0 within g_threshold.
// which selects zeta1 (1) or zeta2 (2). q enters as given (pass conj(q) for the
// adjoint factor).
Amplitude build_amplitude(const CGOSpec& spec, int which, const VectorField& A,
                          const ScalarField& q, double k, const ExponentBundle& phi,
                          const ExponentBundle* minus_psi, SupportBall ball,
                          double g_threshold = 1e-6);

// ---- reflected pairs on the mirror grid ----

struct ReflectedPair {
  ScalarField u1, u2;
  VectorField grad_u1, grad_u2;
};

// u_j(x) = e^{x.zeta_j/h} a_j(x) - e^{xtilde.zeta_j/h} a_j(xtilde); vanishes on
// the plane node-exactly. Amplitudes must live on a mirror-ready grid.
ReflectedPair reflected_pair(const CGOSpec& spec, const Amplitude& a1, const Amplitude& a2);

// ---- remainder ----

struct RemainderResult {
  ScalarField r;
  double h1scl_norm = 0.0;        // sqrt(||r||^2 + ||h grad r||^2) over the ball
  double solvability_constant = 0.0;  // h * h1scl_norm / ||Lza||_{L2(ball)}
  std::size_t iterations = 0;
  double cg_rel_residual = 0.0;
};

// Damped least squares for L_zeta r = -Lza on the periodic cube: PCG on
// (L^H L + lambda (I - h^2 Delta)) r = -L^H Lza with a Fourier-diagonal
// preconditioner. lambda <= 0 selects h^2. Requires >= 4 cells per wavelength of
// the e^{i x . Im zeta / h} oscillation.
RemainderResult solve_remainder(const CGOSpec& spec, int which, const VectorField& A,
                                const ScalarField& q, double k, const Amplitude& amp,
                                SupportBall ball, double lambda = -1.0,
                                double cg_tol = 1e-9, std::size_t max_iter = 400);

}  // namespace mst
