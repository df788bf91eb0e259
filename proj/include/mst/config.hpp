#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "mst/forward.hpp"
#include "mst/recon.hpp"
#include "mst/scenario.hpp"

namespace mst {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UpstreamError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed run configuration: scenario primitives, solver and recon blocks,
// output paths and the mandatory seed. See docs in README for the schema.
struct Config {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::size_t threads = 1;

  Scenario scenario;
  BoundaryTrace trace;      // Dirichlet data for forward/dnmap
  double solver_tol = 1e-6;
  std::size_t solver_max_iter = 500;
  double lift_width = 0.0;

  std::vector<double> cgo_h_ladder{0.4, 0.28, 0.2, 0.14, 0.1};
  Vec3 cgo_xi{1.2, 0.4, 0.8};

  ReconOptions recon;

  std::vector<double> validate_h_ladder{0.3, 0.2, 0.14, 0.1};
  std::vector<double> validate_radii;

  std::uint64_t config_hash = 0;
};

// Parses and validates the JSON file; throws ConfigError with a pointer to the
// offending field.
Config load_config(const std::string& path);

// Subcommand drivers; return process exit codes (0 ok, 2 config, 3 numerical,
// 4 missing upstream artifact).
int cmd_forward(const Config& cfg);
int cmd_dnmap(const Config& cfg);
int cmd_cgo(const Config& cfg);
int cmd_reconstruct(const Config& cfg);
int cmd_validate(const Config& cfg);

}  // namespace mst
