#pragma once

#include <string>
#include <vector>

#include "mst/field.hpp"
#include "mst/fields.hpp"
#include "mst/grid.hpp"

namespace mst {

struct ProbeReport {
  std::string probe_name;
  std::vector<double> ladder;   // h or radius values
  std::vector<double> values;
  double fitted_slope = 0.0;
  bool pass = false;
  double threshold = 0.0;
};

void append_probe_report_jsonl(const std::string& path, const ProbeReport& rep);

// |LHS - RHS| of the magnetic Green formula
//   (L_{A,q} u, v) - (u, L_{A,qbar} v) = (u, (d_n + iA.n) v)_b - ((d_n + iA.n) u, v)_b
// over the sub-box [lo, hi] (node indices), with boundary terms from spectral
// face gradients and trapezoid surface quadrature.
double green_identity_probe(const VectorField& A, const ScalarField& q, const ScalarField& u,
                            const ScalarField& v, std::array<std::size_t, 3> lo,
                            std::array<std::size_t, 3> hi);

enum class CarlemanWeight { Linear, Convexified };

// rho(u, h) = || L_phi u ||_2 / (h || u ||_{H1scl}) for the conjugated operator
// L_phi = e^{phi/h} h^2 (L_{A,q}) e^{-phi/h}, phi = alpha.x (plus the epsilon/2
// (alpha.x)^2 term for the convexified weight). The estimate's content is a
// positive lower bound with no decay along the h-ladder.
// Pass criterion: every ratio >= min_ratio and no decay toward zero as h
// shrinks (the conjugated ratio may grow like 1/h at small h, which is fine; a
// clearly positive log-log slope of ratio vs h is the failure signature).
struct CarlemanOptions {
  CarlemanWeight weight = CarlemanWeight::Linear;
  double convexify_eps = 0.0;  // epsilon for the convexified weight
  double min_ratio = 0.05;     // c0 threshold
  double slope_ceiling = 0.5;
};
ProbeReport carleman_probe(const VectorField& A, const ScalarField& q, Vec3 alpha,
                           const std::vector<ScalarField>& battery,
                           const std::vector<double>& h_ladder, const CarlemanOptions& opt = {});

// Applies the conjugated operator once (exposed for tests).
ScalarField carleman_conjugated_apply(const VectorField& A, const ScalarField& q, Vec3 alpha,
                                      double h, const ScalarField& u, CarlemanWeight weight,
                                      double convexify_eps);

// Sphere integrals Int_{|x|=R} |u|^2 dS along the ladder; classifies the field
// as Rellich-null when the integrals trend to zero.
struct RellichOptions {
  double null_threshold = 1e-10;  // sphere integral level counted as vanishing
  std::size_t n_theta = 24, n_phi = 48;
};
ProbeReport rellich_probe(const ScalarField& u, const std::vector<double>& radii,
                          const RellichOptions& opt = {});

}  // namespace mst
