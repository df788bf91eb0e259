#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "mst/config.hpp"

using namespace mst;

int main(int argc, char** argv) {
  CLI::App app{"mst: forward solves, DN maps, CGO builds, and recovery for the magnetic "
               "Schrodinger problem on a half space"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
  std::uint64_t seed_override = 0;
  bool seed_set = false;

  app.add_option("--config", config_path, "configuration JSON")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--threads", threads, "worker threads for sample sweeps");
  app.add_option("--seed", seed_override, "seed override")->each([&](const std::string&) {
    seed_set = true;
  });

  auto* c_forward = app.add_subcommand("forward", "half-space Dirichlet solve");
  auto* c_dnmap = app.add_subcommand("dnmap", "DN map sampling on gamma1");
  auto* c_cgo = app.add_subcommand("cgo", "CGO builds along the h-ladder");
  auto* c_recon = app.add_subcommand("reconstruct", "curl and q recovery");
  auto* c_validate = app.add_subcommand("validate", "estimate probes");
  std::string recon_mode;
  c_recon->add_option("--mode", recon_mode, "oracle or measurement");
  for (CLI::App* sub : {c_forward, c_dnmap, c_cgo, c_recon, c_validate}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  Config cfg;
  try {
    cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) cfg.seed = seed_override;
    if (threads > 0) {
      cfg.threads = threads;
    } else if (const char* env = std::getenv("MST_THREADS")) {
      cfg.threads = std::max(1, std::atoi(env));
    }
    if (!recon_mode.empty()) {
      if (recon_mode != "oracle" && recon_mode != "measurement") {
        std::cerr << "error: --mode must be oracle or measurement\n";
        return 2;
      }
      cfg.recon.oracle_mode = recon_mode == "oracle";
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*c_forward) return cmd_forward(cfg);
    if (*c_dnmap) return cmd_dnmap(cfg);
    if (*c_cgo) return cmd_cgo(cfg);
    if (*c_recon) return cmd_reconstruct(cfg);
    if (*c_validate) return cmd_validate(cfg);
  } catch (const UpstreamError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
