#include "mst/config.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "mst/cgo.hpp"
#include "mst/dnmap.hpp"
#include "mst/fft.hpp"
#include "mst/io.hpp"
#include "mst/numerics.hpp"
#include "mst/validate.hpp"

namespace mst {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "mst 0.1.0";

double jreq_num(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError("config: missing or non-numeric field " + where + "." + key);
  return j[key].get<double>();
}

Vec3 jvec3(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    throw ConfigError("config: field " + where + "." + key + " must be a 3-array");
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

cplx jcplx(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
    throw ConfigError("config: field " + where + "." + key + " must be [re, im]");
  return cplx(j[key][0].get<double>(), j[key][1].get<double>());
}

PlanePatch jpatch(const json& j, const std::string& where) {
  PlanePatch p;
  p.x0 = jreq_num(j, where, "x0");
  p.x1 = jreq_num(j, where, "x1");
  p.y0 = jreq_num(j, where, "y0");
  p.y1 = jreq_num(j, where, "y1");
  return p;
}

std::uint64_t fnv_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

cplx trunc_gauss(Vec3 p, Vec3 c, double sigma, cplx amp, double trunc) {
  Vec3 d = p - c;
  double r2 = dot(d, d);
  if (r2 >= trunc * trunc) return cplx(0.0);
  return amp * std::exp(-0.5 * r2 / (sigma * sigma));
}

}  // namespace

Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(bytes);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  Config cfg;
  cfg.config_hash = fnv_hash(bytes);
  if (!j.contains("seed") || !j["seed"].is_number_unsigned())
    throw ConfigError("config: missing mandatory field seed");
  cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();

  if (!j.contains("scenario")) throw ConfigError("config: missing field scenario");
  const json& sj = j["scenario"];
  if (!sj.contains("grid")) throw ConfigError("config: missing field scenario.grid");
  std::size_t n = std::size_t(jreq_num(sj["grid"], "scenario.grid", "n"));
  double half = jreq_num(sj["grid"], "scenario.grid", "half_extent");
  if (n % 2 == 0) throw ConfigError("config: scenario.grid.n must be odd (mirror-ready)");
  double k = jreq_num(sj, "scenario", "k");
  if (!(k > 0)) throw ConfigError("config: scenario.k must be positive");
  double ball_r = sj.contains("support_ball")
                      ? jreq_num(sj["support_ball"], "scenario.support_ball", "radius")
                      : 0.6 * half;
  cfg.scenario = make_empty_scenario(k, n, half, ball_r);
  if (sj.contains("gamma1")) cfg.scenario.gamma1 = jpatch(sj["gamma1"], "scenario.gamma1");
  if (sj.contains("gamma2")) cfg.scenario.gamma2 = jpatch(sj["gamma2"], "scenario.gamma2");

  const Grid3& hgrid = cfg.scenario.grid();
  if (sj.contains("potentials")) {
    const json& pj = sj["potentials"];
    if (pj.contains("A")) {
      if (!pj["A"].is_array()) throw ConfigError("config: scenario.potentials.A must be an array");
      int idx = 0;
      for (const json& bj : pj["A"]) {
        std::string where = "scenario.potentials.A[" + std::to_string(idx++) + "]";
        if (bj.value("kind", "gaussian_bump") != std::string("gaussian_bump"))
          throw ConfigError("config: unsupported potential kind at " + where);
        Vec3 c = jvec3(bj, where, "center");
        double sigma = jreq_num(bj, where, "sigma");
        Vec3 amp = jvec3(bj, where, "amplitude");
        double trunc = jreq_num(bj, where, "support_radius");
        for (std::size_t kk = 0; kk < hgrid.dims[2]; ++kk)
          for (std::size_t jj = 0; jj < hgrid.dims[1]; ++jj)
            for (std::size_t ii = 0; ii < hgrid.dims[0]; ++ii) {
              Vec3 p = hgrid.node(ii, jj, kk);
              std::size_t nn = hgrid.index(ii, jj, kk);
              for (int comp = 0; comp < 3; ++comp)
                cfg.scenario.A.v[comp][nn] += trunc_gauss(p, c, sigma, amp[comp], trunc);
            }
      }
    }
    if (pj.contains("q")) {
      if (!pj["q"].is_array()) throw ConfigError("config: scenario.potentials.q must be an array");
      int idx = 0;
      for (const json& bj : pj["q"]) {
        std::string where = "scenario.potentials.q[" + std::to_string(idx++) + "]";
        Vec3 c = jvec3(bj, where, "center");
        double sigma = jreq_num(bj, where, "sigma");
        cplx amp = jcplx(bj, where, "amplitude");
        double trunc = jreq_num(bj, where, "support_radius");
        for (std::size_t kk = 0; kk < hgrid.dims[2]; ++kk)
          for (std::size_t jj = 0; jj < hgrid.dims[1]; ++jj)
            for (std::size_t ii = 0; ii < hgrid.dims[0]; ++ii) {
              Vec3 p = hgrid.node(ii, jj, kk);
              cfg.scenario.q.v[hgrid.index(ii, jj, kk)] += trunc_gauss(p, c, sigma, amp, trunc);
            }
      }
    }
  }
  cfg.scenario.A.support = SupportBall{cfg.scenario.ball.center, cfg.scenario.ball.radius};
  cfg.scenario.q.support = cfg.scenario.A.support;
  try {
    cfg.scenario.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid scenario: ") + e.what());
  }

  // Dirichlet trace: a compactly supported polynomial bump inside gamma2
  double tr = j.contains("trace") ? jreq_num(j["trace"], "trace", "radius") : 0.45 * half;
  cplx tamp = j.contains("trace") ? jcplx(j["trace"], "trace", "amplitude") : cplx(1.0, 0.4);
  double tcx = 0.0, tcy = 0.0;
  if (j.contains("trace") && j["trace"].contains("center")) {
    tcx = j["trace"]["center"][0].get<double>();
    tcy = j["trace"]["center"][1].get<double>();
  }
  cfg.trace = make_trace(hgrid, cfg.scenario.gamma2, [=](double x, double y) {
    double u = ((x - tcx) * (x - tcx) + (y - tcy) * (y - tcy)) / (tr * tr);
    if (u >= 1.0) return cplx(0.0);
    double w = 1.0 - u;
    double w5 = w * w;
    w5 = w5 * w5 * w;
    return tamp * w5 * w5;
  });

  if (j.contains("solver")) {
    cfg.solver_tol = j["solver"].value("tol", 1e-6);
    cfg.solver_max_iter = std::size_t(j["solver"].value("max_iter", 500));
    cfg.lift_width = j["solver"].value("lift_width", 0.0);
  }
  if (j.contains("cgo")) {
    if (j["cgo"].contains("h_ladder"))
      cfg.cgo_h_ladder = j["cgo"]["h_ladder"].get<std::vector<double>>();
    if (j["cgo"].contains("xi")) cfg.cgo_xi = jvec3(j["cgo"], "cgo", "xi");
  }
  if (j.contains("recon")) {
    const json& rj = j["recon"];
    cfg.recon.dual_n = std::size_t(rj.value("dual_n", 48));
    cfg.recon.xi_max = rj.value("xi_max", 0.0);
    std::string mode = rj.value("mode", "oracle");
    if (mode != "oracle" && mode != "measurement")
      throw ConfigError("config: recon.mode must be oracle or measurement");
    cfg.recon.oracle_mode = mode == "oracle";
    cfg.recon.dual_n_measurement = std::size_t(rj.value("dual_n_measurement", 10));
    if (rj.contains("h_ladder"))
      cfg.recon.measurement.h_ladder = rj["h_ladder"].get<std::vector<double>>();
  }
  if (j.contains("validate")) {
    if (j["validate"].contains("h_ladder"))
      cfg.validate_h_ladder = j["validate"]["h_ladder"].get<std::vector<double>>();
    if (j["validate"].contains("radii"))
      cfg.validate_radii = j["validate"]["radii"].get<std::vector<double>>();
  }
  return cfg;
}

namespace {

void write_run_manifest(const Config& cfg, const std::string& command, double wall_seconds) {
  std::ofstream os(cfg.out_dir + "/run_manifest.json");
  char buf[256];
  os << "{\n  \"command\": \"" << command << "\",\n";
  std::snprintf(buf, sizeof(buf), "  \"config_hash\": \"%016llx\",\n",
                static_cast<unsigned long long>(cfg.config_hash));
  os << buf;
  std::snprintf(buf, sizeof(buf), "  \"seed\": %llu,\n",
                static_cast<unsigned long long>(cfg.seed));
  os << buf;
  os << "  \"version\": \"" << kVersion << "\",\n";
  std::snprintf(buf, sizeof(buf), "  \"wall_seconds\": %.3f\n}\n", wall_seconds);
  os << buf;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace

int cmd_forward(const Config& cfg) {
  Stopwatch sw;
  std::filesystem::create_directories(cfg.out_dir);
  DirichletOptions opt;
  opt.tol = cfg.solver_tol;
  opt.max_iter = cfg.solver_max_iter;
  opt.lift_width = cfg.lift_width;
  HalfspaceSolution sol = solve_halfspace_dirichlet(cfg.scenario, cfg.trace, opt);
  if (!sol.report.converged && sol.report.relative_residual > cfg.solver_tol) return 3;
  write_field(cfg.out_dir + "/u.msfld", sol.u);
  write_solve_report_csv(cfg.out_dir + "/solve_report.csv", sol.report);
  write_run_manifest(cfg, "forward", sw.seconds());
  return 0;
}

int cmd_dnmap(const Config& cfg) {
  Stopwatch sw;
  std::filesystem::create_directories(cfg.out_dir);
  DirichletOptions opt;
  opt.tol = cfg.solver_tol;
  opt.max_iter = cfg.solver_max_iter;
  opt.lift_width = cfg.lift_width;
  DNRecord rec = dn_apply(cfg.scenario, cfg.trace, opt);
  write_dn_record_csv(cfg.out_dir + "/dn_record.csv", rec);
  {
    std::ofstream ts(cfg.out_dir + "/trace.csv");
    ts << "x1,x2,re,im\n";
    char line[128];
    const Grid3& h = cfg.scenario.grid();
    for (std::size_t jj = 0; jj < h.dims[1]; ++jj)
      for (std::size_t ii = 0; ii < h.dims[0]; ++ii) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n",
                      h.origin[0] + double(ii) * h.spacing[0],
                      h.origin[1] + double(jj) * h.spacing[1],
                      cfg.trace.values[cfg.trace.index(ii, jj)].real(),
                      cfg.trace.values[cfg.trace.index(ii, jj)].imag());
        ts << line;
      }
  }
  // batch manifest: one entry per trace in this run
  std::ofstream os(cfg.out_dir + "/dn_manifest.json");
  os << "[\n  {\"trace_file\": \"trace.csv\", \"record_file\": \"dn_record.csv\", "
     << "\"scenario_hash\": \"" << hash_hex(scenario_hash(cfg.scenario)) << "\"}\n]\n";
  write_run_manifest(cfg, "dnmap", sw.seconds());
  return 0;
}

int cmd_cgo(const Config& cfg) {
  Stopwatch sw;
  std::filesystem::create_directories(cfg.out_dir);
  ExtendedPotentials ext = extend_potentials(cfg.scenario);
  ext.A.support = SupportBall{cfg.scenario.ball.center, cfg.scenario.ball.radius};
  ext.q.support = ext.A.support;
  auto [g1, g2] = special_gammas(cfg.cgo_xi);

  std::ofstream os(cfg.out_dir + "/cgo_manifest.json");
  os << "[\n";
  char buf[512];
  bool first = true;
  for (double h : cfg.cgo_h_ladder) {
    CGOSpec spec = make_zeta_pair(h, cfg.cgo_xi, g1, g2);
    ExponentBundle phi = solve_transport(ext.A, g1, g2, spec.eps);
    Amplitude amp = build_amplitude(spec, 1, ext.A, ext.q, cfg.scenario.k, phi, nullptr,
                                    cfg.scenario.ball);
    RemainderResult rem = solve_remainder(spec, 1, ext.A, ext.q, cfg.scenario.k, amp,
                                          cfg.scenario.ball);
    std::string tag = "h" + std::to_string(h);
    write_field(cfg.out_dir + "/cgo_amplitude_" + tag + ".msfld", amp.a);
    write_field(cfg.out_dir + "/cgo_phi_" + tag + ".msfld", phi.val);
    std::snprintf(buf, sizeof(buf),
                  "%s  {\"h\": %.17g, \"xi\": [%.17g,%.17g,%.17g], "
                  "\"gamma1\": [%.17g,%.17g,%.17g], \"gamma2\": [%.17g,%.17g,%.17g], "
                  "\"residual_sup\": %.17g, \"remainder_norm\": %.17g, "
                  "\"files\": [\"cgo_amplitude_%s.msfld\", \"cgo_phi_%s.msfld\"]}",
                  first ? "" : ",\n", h, cfg.cgo_xi.x, cfg.cgo_xi.y, cfg.cgo_xi.z, g1.x, g1.y,
                  g1.z, g2.x, g2.y, g2.z, amp.residual_sup, rem.h1scl_norm, tag.c_str(),
                  tag.c_str());
    os << buf;
    first = false;
  }
  os << "\n]\n";
  write_run_manifest(cfg, "cgo", sw.seconds());
  return 0;
}

int cmd_reconstruct(const Config& cfg) {
  Stopwatch sw;
  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.recon.oracle_mode &&
      !std::filesystem::exists(cfg.out_dir + "/cgo_manifest.json"))
    throw UpstreamError("reconstruct: measurement mode needs cgo manifests (run cgo first) or --mode oracle");
  ReconOptions opt = cfg.recon;
  opt.threads = cfg.threads;
  ReconResult r = reconstruct(cfg.scenario, opt);
  write_field(cfg.out_dir + "/recovered_curl.msfld", r.curl_field);
  write_field(cfg.out_dir + "/recovered_q.msfld", r.q_field);
  write_recon_metrics_json(cfg.out_dir + "/recon_metrics.json", r);
  write_run_manifest(cfg, "reconstruct", sw.seconds());
  return 0;
}

int cmd_validate(const Config& cfg) {
  Stopwatch sw;
  std::filesystem::create_directories(cfg.out_dir);
  const Grid3 full = [&] {
    Grid3 g = cfg.scenario.grid();
    g.dims[2] = 2 * g.dims[2] - 1;
    return g;
  }();
  std::string path = cfg.out_dir + "/probes.jsonl";
  std::remove(path.c_str());

  // reproducible battery from the seed
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<ScalarField> battery;
  double half = 0.5 * full.extent()[0];
  for (int b = 0; b < 3; ++b) {
    Vec3 c{0.15 * half * u(rng), 0.15 * half * u(rng), 0.15 * half * u(rng)};
    double sigma = (0.07 + 0.02 * std::abs(u(rng))) * half;
    battery.push_back(make_gaussian_bump(full, c, sigma, cplx(u(rng), u(rng)), 5.5 * sigma));
  }

  ExtendedPotentials ext = extend_potentials(cfg.scenario);
  bool all_pass = true;

  ProbeReport carl = carleman_probe(ext.A, ext.q, {1, 0, 0}, battery, cfg.validate_h_ladder);
  append_probe_report_jsonl(path, carl);
  all_pass = all_pass && carl.pass;

  CarlemanOptions copt;
  copt.weight = CarlemanWeight::Convexified;
  copt.convexify_eps = 0.3;
  ProbeReport carl2 =
      carleman_probe(ext.A, ext.q, {1, 0, 0}, battery, cfg.validate_h_ladder, copt);
  carl2.probe_name = "carleman_convexified";
  append_probe_report_jsonl(path, carl2);
  all_pass = all_pass && carl2.pass;

  // green identity residual on the battery
  {
    ScalarField& uu = battery[0];
    ScalarField& vv = battery[1];
    std::array<std::size_t, 3> lo{full.dims[0] / 4, full.dims[1] / 4, full.dims[2] / 4};
    std::array<std::size_t, 3> hi{3 * full.dims[0] / 4, 3 * full.dims[1] / 4,
                                  3 * full.dims[2] / 4};
    double resid = green_identity_probe(ext.A, ext.q, uu, vv, lo, hi);
    ProbeReport rep;
    rep.probe_name = "green_identity";
    rep.values = {resid};
    double scale = (l2_norm(uu) + l2_norm(laplacian_spectral(uu))) *
                   (l2_norm(vv) + l2_norm(laplacian_spectral(vv)));
    rep.threshold = 1e-3 * scale;
    rep.pass = resid < rep.threshold;
    append_probe_report_jsonl(path, rep);
    all_pass = all_pass && rep.pass;
  }

  // Rellich classification battery: zero field and a point source
  {
    std::vector<double> radii = cfg.validate_radii;
    if (radii.empty()) {
      double rmax = 0.8 * half;
      for (double r = 0.45 * half; r <= rmax; r *= 1.25) radii.push_back(r);
    }
    ScalarField zero(full);
    ProbeReport rz = rellich_probe(zero, radii);
    rz.probe_name = "rellich_null";
    append_probe_report_jsonl(path, rz);
    all_pass = all_pass && rz.pass;

    ScalarField gpt = sample_scalar(full, [&](Vec3 p) {
      double r = norm(p);
      return r < 1e-9 ? cplx(0) : green_eval(cfg.scenario.k, p, {0, 0, 0});
    });
    ProbeReport rg = rellich_probe(gpt, radii);
    rg.probe_name = "rellich_point_source";
    rg.pass = !rg.pass;  // correctly NOT flagged as null
    append_probe_report_jsonl(path, rg);
    all_pass = all_pass && rg.pass;
  }

  write_run_manifest(cfg, "validate", sw.seconds());
  return all_pass ? 0 : 3;
}

}  // namespace mst
