#pragma once

#include <cstdint>
#include <string>

#include "mst/forward.hpp"
#include "mst/scenario.hpp"

namespace mst {

// Gauge function psi with psi = 0 on the plane node-exactly and d3 psi(.,0) equal
// to -A3(.,0) by the analytic limit of t * (v * phi_t).
struct GaugeFunction {
  ScalarField psi;        // on the half grid
  VectorField grad_psi;   // analytic-in-depth gradient; plane row exact
};

struct GaugeFixResult {
  VectorField A_fixed;    // A + grad psi, normal component zero on the plane
  GaugeFunction gauge;
};

// Normal-component removal: psi(x', x3) = x3 * (v * phi_{|x3|})(x') * chi(x3) with
// v = -A3(., 0). The mollification is evaluated by a fixed quadrature in the
// kernel variable with bicubic sampling of v, so it stays uniformly accurate down
// to t = 0 and the plane rows are exact limits.
GaugeFixResult gauge_fix(const VectorField& A, double cutoff_depth = 0.0);

// Samples of the DN map Lambda f = (d_n + i A.n) u restricted to Gamma1.
struct DNRecord {
  Grid3 grid3;
  std::vector<cplx> values;            // full plane; x fastest
  std::vector<std::uint8_t> gamma1_mask;
  bool gauge_fixed = true;

  std::size_t index(std::size_t i, std::size_t j) const { return j * grid3.dims[0] + i; }
};

// Solves the Dirichlet problem and samples d3 u on the plane with a one-sided
// 4th-order stencil into x3 < 0, plus the i A.n term (zero under the gauge).
DNRecord dn_apply(const Scenario& scenario, const BoundaryTrace& f,
                  const DirichletOptions& opt = {});

void write_dn_record_csv(const std::string& path, const DNRecord& rec);

// Relative L2(Gamma1) deviation between Lambda_{A,q} f and Lambda_{A+grad psi,q} f.
struct GaugeInvarianceReport {
  DNRecord base, shifted;
  double deviation = 0.0;  // ||r1 - r2||_{L2(G1)} / ||r1||_{L2(G1)}
};
GaugeInvarianceReport gauge_invariance_check(const Scenario& scenario,
                                             const GaugeFunction& gauge,
                                             const BoundaryTrace& f,
                                             const DirichletOptions& opt = {});

}  // namespace mst
