#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "mst/types.hpp"

namespace mst {

struct GmresOptions {
  double abs_tol = 1e-10;
  std::size_t max_iter = 500;
  std::size_t restart = 60;
  std::size_t stagnation_window = 50;  // plateau length that aborts the solve
};

struct GmresResult {
  bool converged = false;
  bool stagnated = false;
  std::size_t iterations = 0;
  double residual = 0.0;  // final ||b - Ax||
  std::vector<double> history;
};

using LinearOp = std::function<void(const std::vector<cplx>&, std::vector<cplx>&)>;

// Restarted GMRES with modified Gram-Schmidt; all reductions are fixed-order
// serial sums, so results are bitwise reproducible run to run.
GmresResult gmres(const LinearOp& apply, const std::vector<cplx>& b, std::vector<cplx>& x,
                  const GmresOptions& opt);

}  // namespace mst
