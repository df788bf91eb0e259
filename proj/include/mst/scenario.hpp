#pragma once

#include <cstdint>
#include <string>

#include "mst/field.hpp"
#include "mst/fields.hpp"
#include "mst/grid.hpp"

namespace mst {

// Axis-aligned rectangle on the plane x3 = 0.
struct PlanePatch {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

// Wavenumber, potentials, support ball and the two boundary patches. Potentials
// live on the lower half (x3 <= 0) of a mirror-ready cube grid; the support ball is
// centered on the plane so that even/odd extension stays inside it.
struct Scenario {
  double k = 1.0;
  VectorField A;  // real-valued entries
  ScalarField q;  // Im q <= 0
  SupportBall ball;
  PlanePatch gamma1, gamma2;

  const Grid3& grid() const { return A.grid; }
  void validate() const;
};

// Potentials extended to the whole mirror grid: A1, A2, q even; A3 odd.
struct ExtendedPotentials {
  VectorField A;  // on the mirror grid
  ScalarField q;
};
ExtendedPotentials extend_potentials(const Scenario& s);

// Zero-potential scenario on a mirror-ready cube grid (helpers for tests/CLI).
Scenario make_empty_scenario(double k, std::size_t n, double half_extent, double ball_radius);

// FNV-1a over the scenario's defining bytes; keys batch manifests.
std::uint64_t scenario_hash(const Scenario& s);
std::string hash_hex(std::uint64_t h);

}  // namespace mst
