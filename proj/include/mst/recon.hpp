#pragma once

#include <string>

#include "mst/cgo.hpp"
#include "mst/scenario.hpp"

namespace mst {

// Centered dual lattice: modes m in [-n/2, n/2)^3, xi = m * dxi.
struct FourierLattice {
  std::size_t n = 0;
  double dxi = 0.0;

  std::size_t size() const { return n * n * n; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (k * n + j) * n + i;
  }
  Vec3 node(std::size_t i, std::size_t j, std::size_t k) const {
    double half = double(n / 2);
    return {(double(i) - half) * dxi, (double(j) - half) * dxi, (double(k) - half) * dxi};
  }
};

// Samples v(xi) = Int f(x) e^{+i x.xi} dx on the lattice; rank 1 for q
// differences, 3 for A differences. The x3-axis column xi1 = xi2 = 0 is masked.
struct FourierSampleSet {
  FourierLattice lattice;
  int rank = 1;
  std::array<std::vector<cplx>, 3> v;  // components 0..rank-1
  std::vector<std::uint8_t> axis_mask;
  std::vector<std::uint8_t> flagged;   // extrapolation did not settle
};

// Direct transforms of known (extended) differences by zero-padded FFT; the
// lattice spacing snaps to 2 pi / (M h) for the padded size M.
FourierSampleSet oracle_samples(const VectorField& diff_ext, std::size_t dual_n, double xi_max);
FourierSampleSet oracle_samples(const ScalarField& diff_ext, std::size_t dual_n, double xi_max);

// Single-xi transform by direct summation (arbitrary xi).
cplx fourier_sample_direct(const ScalarField& f, Vec3 xi);
CVec3 fourier_sample_direct(const VectorField& f, Vec3 xi);

// ---- the integral identity ----

struct PairingOptions {
  double trace_tol = 1e-6;     // admissible ||u||_{L2(l)} / ||u||_{L2(B-)}
  double window_depth = 0.0;   // Kaiser taper span above the potential support; 0 = off
  double kaiser_beta = 6.0;
};

// Quadrature of i (A2-A1).(conj(u2) grad u1 - u1 grad conj(u2))
//            + (A1^2 - A2^2 + q1 - q2) u1 conj(u2) over the lower half ball.
// Fields live on the mirror grid; the trace condition on l is checked first.
cplx pairing_integral(const ScalarField& u1, const VectorField& grad_u1, const ScalarField& u2,
                      const VectorField& grad_u2, const VectorField& A1, const VectorField& A2,
                      const ScalarField& q1, const ScalarField& q2, SupportBall ball,
                      const PairingOptions& opt = {});

// ---- measurement-mode samples (CGO pairings of the identity's right side) ----

struct MeasurementOptions {
  std::vector<double> h_ladder{0.4, 0.28, 0.2, 0.14, 0.1};
  double extrapolation_order = 1.0 / 3.0;
  PairingOptions pairing;
  // Frame-adapted ladders: the cross phases oscillate at 2 gamma2.z / h, so their
  // Riemann-Lebesgue suppression needs h <~ (potential width) * gamma2.z. When
  // adapt_cross_scale > 0 (the width), each xi gets the ladder
  // {1.5 t, 1.22 t, t} with t = 0.55 * scale * |gamma2.z| clamped into
  // [h_floor, h_ladder.front() / 1.5].
  double adapt_cross_scale = 0.0;
  double h_floor = 0.0;  // 0: h_ladder.back()
};

struct MeasuredSample {
  cplx value{};
  bool flagged = false;
  double fit_residual = 0.0;
};

// (gamma1 + i gamma2) . F[(A2~ - A1~) chi](xi) as the extrapolated h -> 0 limit
// of h * pairing / (2i) with the e^{-Psi} corrected CGO pair.
MeasuredSample measurement_sample_A(const VectorField& A1_ext, const ScalarField& q1_ext,
                                    const VectorField& A2_ext, const ScalarField& q2_ext,
                                    double k, SupportBall ball, Vec3 xi,
                                    const MeasurementOptions& opt);

// F[(q1~ - q2~) chi](xi) for an aligned pair (A1~ = A2~) as the extrapolated
// limit of the pairing with g = e^{-Psi}; g is validated against the transport
// condition first.
MeasuredSample measurement_sample_q(const VectorField& A_ext, const ScalarField& q1_ext,
                                    const ScalarField& q2_ext, double k, SupportBall ball,
                                    Vec3 xi, const MeasurementOptions& opt);

// ---- recovery ----

struct CurlRecovery {
  VectorField curl;        // inverse transform of -i xi x v on the recon grid
  double axis_fill_error = 0.0;  // interpolation vs sample magnitude on the axis
  double coverage = 1.0;
};

// Fills the masked axis by transverse interpolation, crosses with the frequency
// and inverse-transforms onto a grid centered at `center` with period 2 pi/dxi.
// Rejects coverage (unmasked, unflagged fraction) below 90%.
CurlRecovery recover_curl(const FourierSampleSet& samples, Vec3 center);

struct QRecovery {
  ScalarField q;
  double axis_fill_error = 0.0;
  double coverage = 1.0;
  double flagged_fraction = 0.0;
};
QRecovery recover_q_field(const FourierSampleSet& samples, Vec3 center);

// Helmholtz alignment: psi with grad psi = D for a certified curl-free D on the
// mirror grid; psi = 0 outside the ball, zero-mean convention inside.
ScalarField gauge_align(const VectorField& D_ext, SupportBall ball,
                        double curl_certification_tol = 1e-3);

// ---- end-to-end driver ----

struct ReconOptions {
  std::size_t dual_n = 48;
  double xi_max = 0.0;       // 0: 0.9 * Nyquist of the scenario grid
  bool oracle_mode = true;
  MeasurementOptions measurement;
  std::size_t threads = 1;
  std::size_t dual_n_measurement = 10;  // measurement-mode lattice (desk scale)
  std::size_t consistency_samples = 0;  // 0: every unmasked node
};

struct ReconResult {
  VectorField curl_field;   // recovered curl of (A2~ - A1~)
  ScalarField q_field;      // recovered q2~ - q1~
  double rel_err_curl = -1.0;
  double rel_err_q = -1.0;
  double axis_fill_error = 0.0;
  double flagged_fraction = 0.0;
  double consistency = 0.0;  // measurement vs oracle agreement fraction
};

// Recovers curl(A) against a zero magnetic background and q against a zero-q
// background with the same A (the aligned pair), comparing against the known
// truth of the scenario. Oracle mode transforms the known differences; the
// measurement mode runs the CGO pairing per lattice node.
ReconResult reconstruct(const Scenario& scenario, const ReconOptions& opt);

void write_recon_metrics_json(const std::string& path, const ReconResult& r);

}  // namespace mst
