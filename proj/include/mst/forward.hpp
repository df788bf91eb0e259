#pragma once

#include <memory>
#include <string>

#include "mst/field.hpp"
#include "mst/gmres.hpp"
#include "mst/greens.hpp"
#include "mst/scenario.hpp"

namespace mst {

// (L_{A,q} - k^2) u with spectral Laplacian/gradient. div A defaults to centered
// differences (the potentials are only Lipschitz in general); spectral div is for
// smooth resolved potentials, where it keeps the operator algebra consistent.
enum class DivMode { CenteredFD, Spectral };
ScalarField apply_magnetic_operator(const VectorField& A, const ScalarField& q, double k,
                                    const ScalarField& u,
                                    DivMode div_mode = DivMode::CenteredFD);

struct SolveReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;  // ||(I - W G) g - f|| / ||f||, the PDE residual
  bool converged = false;
  bool stagnated = false;
  std::vector<double> history;
  std::vector<RadiationRecord> radiating_check;
};

void write_solve_report_csv(const std::string& path, const SolveReport& rep);

struct ForwardSolution {
  ScalarField u;
  VectorField grad_u;       // from the gradient kernel route
  ScalarField source_density;  // g with u = G0 * g
  SolveReport report;
};

struct HalfspaceSolution {
  ScalarField u;            // on the half grid
  VectorField grad_u;
  ScalarField u_full;       // mirror-grid field (odd in x3)
  VectorField grad_u_full;
  double trace_linf = 0.0;  // max |u| on the plane
  double oddness_defect = 0.0;  // relative Linf norm of the even part
  SolveReport report;
};

// Boundary data on the plane x3 = 0 carried on the scenario grid's plane layout.
struct BoundaryTrace {
  Grid3 grid3;                // the 3D grid whose plane layer this lives on
  std::vector<cplx> values;   // dims[0] * dims[1], x fastest
  std::vector<std::uint8_t> mask;  // patch membership

  std::size_t index(std::size_t i, std::size_t j) const { return j * grid3.dims[0] + i; }
};

BoundaryTrace make_trace(const Grid3& g, const PlanePatch& patch,
                         const std::function<cplx(double, double)>& f);

// Lippmann-Schwinger solver: u = G0 * g with (I - W G0) g = f, W u = 2i A.grad u - p u.
// The operator is a compact perturbation of the identity, inverted by GMRES on the
// potential-support window. Fields live on the whole-space (mirror) grid.
class ForwardSolver {
 public:
  // A_ext, q_ext on a mirror-ready cube grid; ball bounds the potential support.
  ForwardSolver(VectorField A_ext, ScalarField q_ext, double k, SupportBall ball,
                double source_radius);

  const Grid3& grid() const { return A_.grid; }
  double k() const { return k_; }
  const GreenKernel& kernel() const { return *kernel_; }
  const ScalarField& effective_p() const { return p_; }

  // Outgoing solution of (L_{A,q} - k^2) u = f in R^3, f compactly supported.
  ForwardSolution solve_freespace(const ScalarField& f, double tol,
                                  std::size_t max_iter = 500,
                                  const std::vector<cplx>* initial = nullptr) const;

 private:
  void potential_term(const ScalarField& u, const VectorField& grad_u,
                      std::vector<cplx>& out) const;

  VectorField A_;
  ScalarField q_;
  ScalarField p_;  // -i div A + A^2 + q
  double k_;
  SupportBall ball_;
  std::vector<std::size_t> window_;  // nodes where the potentials act
  std::unique_ptr<GreenKernel> kernel_;
};

// Half-space problem with zero Dirichlet data and source f supported in x3 < 0:
// odd extension of f, whole-space solve with the extended potentials, restriction.
// The scenario carries half-grid potentials; gauge precondition A3|_{x3=0} = 0.
HalfspaceSolution solve_halfspace_source(const Scenario& scenario, const ScalarField& f_half,
                                         double tol, std::size_t max_iter = 500);

// Dirichlet problem u|_{x3=0} = f via the lift construction: F = f(x1,x2) chi(x3),
// solve (L - k^2) v = -(L - k^2) F with zero trace, u = v + F.
struct DirichletOptions {
  double tol = 1e-6;
  std::size_t max_iter = 500;
  double lift_width = 0.0;  // chi support depth; 0 selects min(24 cells, 0.7 depth)
};
HalfspaceSolution solve_halfspace_dirichlet(const Scenario& scenario, const BoundaryTrace& f,
                                            const DirichletOptions& opt = {});

}  // namespace mst
