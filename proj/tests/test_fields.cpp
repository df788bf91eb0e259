#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "mst/fft.hpp"
#include "mst/fields.hpp"
#include "mst/io.hpp"
#include "mst/numerics.hpp"
#include "mst/scenario.hpp"

using namespace mst;

namespace {

Grid3 half_grid_for_tests(std::size_t n = 33, double half_extent = 1.0) {
  return make_cube_grid({0, 0, 0}, half_extent, n).half_grid();
}

}  // namespace

TEST_CASE("reflect_extend: zero extends to zero") {
  ScalarField f(half_grid_for_tests());
  ScalarField g = reflect_extend(f, Parity::Odd);
  CHECK(linf_norm(g) == 0.0);
  CHECK(g.grid.mirror_ready());
}

TEST_CASE("reflect_extend: f(x)=x3 is its own odd extension") {
  Grid3 h = half_grid_for_tests();
  ScalarField f = sample_scalar(h, [](Vec3 p) { return cplx(p.z); });
  ScalarField g = reflect_extend(f, Parity::Odd);
  for (std::size_t k = 0; k < g.grid.dims[2]; ++k)
    for (std::size_t j = 0; j < g.grid.dims[1]; ++j)
      for (std::size_t i = 0; i < g.grid.dims[0]; ++i)
        CHECK(g.at(i, j, k) == cplx(g.grid.node(i, j, k).z));
}

TEST_CASE("reflect_extend: node-wise symmetry oracle for a Gaussian A") {
  Grid3 h = half_grid_for_tests(33);
  // A3 centered below the plane so it vanishes on x3 = 0.
  VectorField A(h);
  VectorField bump12 = make_gaussian_bump_vec(h, {0.1, 0.0, -0.45}, {0.2, 0.25, 0.2},
                                              {1.0, 0.7, 0.0}, 0.35);
  VectorField bump3 = make_gaussian_bump_vec(h, {0.0, -0.1, -0.5}, {0.2, 0.2, 0.15},
                                             {0.0, 0.0, 0.9}, 0.35);
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < h.size(); ++n) A.v[c][n] = bump12.v[c][n] + bump3.v[c][n];
  A.support = SupportBall{{0, 0, 0}, 0.9};

  VectorField Ae = reflect_extend(A, {Parity::Even, Parity::Even, Parity::Odd});
  const Grid3& g = Ae.grid;
  std::size_t kp = g.plane_k();
  double dev = 0.0;
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        std::size_t km = 2 * kp - k;
        dev = std::max(dev, std::abs(Ae.v[0][g.index(i, j, km)] - Ae.v[0][g.index(i, j, k)]));
        dev = std::max(dev, std::abs(Ae.v[1][g.index(i, j, km)] - Ae.v[1][g.index(i, j, k)]));
        dev = std::max(dev, std::abs(Ae.v[2][g.index(i, j, km)] + Ae.v[2][g.index(i, j, k)]));
      }
  CHECK(dev == 0.0);  // extension is a node copy, so the symmetry is exact
}

TEST_CASE("reflect_extend: odd parity with nonzero plane values is rejected") {
  Grid3 h = half_grid_for_tests();
  ScalarField f = sample_scalar(h, [](Vec3) { return cplx(1.0); });
  CHECK_THROWS(reflect_extend(f, Parity::Odd));
}

TEST_CASE("reflect_extend: restriction returns the input bit-exactly") {
  Grid3 h = half_grid_for_tests();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField f(h);
  for (cplx& z : f.v) z = cplx(u(rng), u(rng));
  // make the plane layer zero so odd extension is admissible
  std::size_t ktop = h.dims[2] - 1;
  for (std::size_t j = 0; j < h.dims[1]; ++j)
    for (std::size_t i = 0; i < h.dims[0]; ++i) f.at(i, j, ktop) = 0.0;
  ScalarField back = restrict_to_half(reflect_extend(f, Parity::Odd));
  REQUIRE(back.v.size() == f.v.size());
  for (std::size_t n = 0; n < f.v.size(); ++n) CHECK(back.v[n] == f.v[n]);
}

TEST_CASE("parity algebra: Laplacian, A3*d3 and even multipliers preserve oddness") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 33);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);

  // random smooth odd field: odd combination of a few Gaussians
  ScalarField f(g);
  for (int b = 0; b < 3; ++b) {
    Vec3 c{0.4 * u(rng), 0.4 * u(rng), -0.3 - 0.2 * std::abs(u(rng))};
    double s = 0.15 + 0.1 * std::abs(u(rng));
    cplx amp(u(rng), u(rng));
    for (std::size_t k = 0; k < g.dims[2]; ++k)
      for (std::size_t j = 0; j < g.dims[1]; ++j)
        for (std::size_t i = 0; i < g.dims[0]; ++i) {
          Vec3 p = g.node(i, j, k);
          auto gauss = [&](Vec3 x) {
            Vec3 d = x - c;
            return std::exp(-0.5 * dot(d, d) / (s * s));
          };
          f.at(i, j, k) += amp * (gauss(p) - gauss(mirror_z(p)));
        }
  }
  auto odd_defect = [&](const ScalarField& w) {
    ScalarField e = parity_part(w, Parity::Even);
    return linf_norm(e) / std::max(linf_norm(w), 1e-300);
  };
  REQUIRE(odd_defect(f) < 1e-13);

  CHECK(odd_defect(laplacian_spectral(f)) < 1e-10);

  // even multiplier
  ScalarField even = sample_scalar(g, [](Vec3 p) { return cplx(std::cos(p.z) + p.x); });
  ScalarField prod(g);
  for (std::size_t n = 0; n < g.size(); ++n) prod.v[n] = even.v[n] * f.v[n];
  CHECK(odd_defect(prod) < 1e-13);

  // odd A3 times d3(odd) is odd
  ScalarField a3 = sample_scalar(g, [](Vec3 p) { return cplx(std::sin(p.z)); });
  VectorField grad = grad_spectral(f);
  ScalarField a3d3(g);
  for (std::size_t n = 0; n < g.size(); ++n) a3d3.v[n] = a3.v[n] * grad.v[2][n];
  CHECK(odd_defect(a3d3) < 1e-10);
}

TEST_CASE("mollify: zero field and constants") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 49);
  VectorField A(g);
  A.support = SupportBall{{0, 0, 0}, 0.5};
  auto r = mollify(A, 0.2);
  CHECK(linf_norm(r.sharp) == 0.0);
  CHECK(linf_norm(r.flat) == 0.0);

  // constant inside a ball: kernel sees only the constant at the center
  VectorField C = sample_vector(g, [](Vec3 p) {
    return norm(p) < 0.5 ? CVec3{2.0, 0.0, 0.0} : CVec3{};
  });
  C.support = SupportBall{{0, 0, 0}, 0.5};
  double eps = 0.15;
  auto rc = mollify(C, eps);
  std::size_t mid = g.index(24, 24, 24);
  CHECK(std::abs(rc.sharp.v[0][mid] - 2.0) < 1e-12);
  CHECK(std::abs(rc.flat.v[0][mid]) < 1e-12);
  // exact split everywhere
  for (std::size_t n = 0; n < g.size(); ++n)
    CHECK(rc.sharp.v[0][n] + rc.flat.v[0][n] == C.v[0][n]);
}

TEST_CASE("mollify: Lipschitz ladder |A_flat| <= Lip * eps with slope ~ 1") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 65);
  // A1 = |x1| truncated by a wide tent; Lipschitz constant 1 in the core
  VectorField A = sample_vector(g, [](Vec3 p) {
    double t = std::max(0.0, 1.0 - norm(p) / 0.6);
    return CVec3{std::abs(p.x) * std::min(1.0, 4.0 * t), 0.0, 0.0};
  });
  A.support = SupportBall{{0, 0, 0}, 0.6};
  double lip = lipschitz_estimate(A);

  std::vector<double> ladder{0.2, 0.1, 0.07};
  std::vector<double> flats;
  for (double eps : ladder) {
    auto r = mollify(A, eps);
    double fl = linf_norm(r.flat);
    CHECK(fl <= 1.05 * lip * eps);
    flats.push_back(fl);
  }
  double slope = fit_loglog_slope(ladder, flats);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("mollify: derivative bounds of the sharp part") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 65);
  VectorField A = make_tent_vec(g, {0, 0, 0}, 0.5, {1.0, 0.0, 0.0});
  double d1_prev = 0, d2_prev = 0;
  for (double eps : {0.2, 0.1}) {
    auto r = mollify(A, eps);
    ScalarField a0 = r.sharp.component(0);
    VectorField d1 = grad_spectral(a0);
    ScalarField d2 = laplacian_spectral(a0);
    double n1 = linf_norm(d1), n2 = linf_norm(d2);
    // first derivatives stay bounded, second scale like 1/eps
    if (d1_prev > 0) {
      CHECK(n1 < 3.0 * d1_prev + 1.0);
      CHECK(n2 > 1.2 * d2_prev);
    }
    d1_prev = n1;
    d2_prev = n2;
  }
}

TEST_CASE("mollify: eps below resolvable threshold is rejected") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 33);
  VectorField A(g);
  A.support = SupportBall{{0, 0, 0}, 0.4};
  CHECK_THROWS_WITH_AS(mollify(A, 0.01), doctest::Contains("threshold"), std::invalid_argument);
}

TEST_CASE("make_potential: zero amplitude gives the zero field") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 33);
  ScalarField f = make_gaussian_bump(g, {0, 0, 0}, 0.2, 0.0, 0.5);
  CHECK(linf_norm(f) == 0.0);
}

TEST_CASE("make_potential: gradient_field matches the spectral gradient") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 65);
  auto r = make_gradient_field(g, {0.1, -0.05, 0.0}, 0.55, 1.0);
  VectorField spec = grad_spectral(r.psi);
  CHECK(rel_l2_error(spec, r.grad_psi) < 1e-6);
  // discrete curl of grad(psi) vanishes
  VectorField c = curl_spectral(r.grad_psi);
  CHECK(l2_norm(c) / std::max(l2_norm(r.grad_psi), 1e-300) < 1e-6);
}

TEST_CASE("make_potential: smoothed indicator bounds and plateaus") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 49);
  double r0 = 0.5, delta = 0.1;
  ScalarField f = make_smoothed_indicator(g, {0, 0, 0}, r0, delta);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        double val = f.at(i, j, k).real();
        double r = norm(g.node(i, j, k));
        CHECK(val >= 0.0);
        CHECK(val <= 1.0);
        if (r <= r0 - delta) CHECK(val == doctest::Approx(1.0).epsilon(1e-12));
        if (r >= r0 + delta) CHECK(val == 0.0);
      }
}

TEST_CASE("make_potential: support overflow is rejected") {
  Grid3 g = make_cube_grid({0, 0, 0}, 1.0, 33);
  CHECK_THROWS(make_gaussian_bump(g, {0.8, 0, 0}, 0.2, 1.0, 0.5));
}

TEST_CASE("MSFLD1: byte layout is exactly as documented") {
  Grid3 g({0.5, -1.0, 2.0}, {0.25, 0.5, 1.0}, {2, 2, 2});
  ScalarField f(g);
  for (std::size_t n = 0; n < 8; ++n) f.v[n] = cplx(double(n), -double(n));
  write_field("msfld1_layout.bin", f);

  std::ifstream is("msfld1_layout.bin", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 6 + 3 * 8 + 3 * 8 + 3 * 8 + 1 + 8 * 16);
  CHECK(std::string(bytes.begin(), bytes.begin() + 6) == "MSFLD1");
  auto u64_at = [&](std::size_t off) {
    std::uint64_t v;
    std::memcpy(&v, &bytes[off], 8);
    return v;
  };
  auto f64_at = [&](std::size_t off) {
    double v;
    std::memcpy(&v, &bytes[off], 8);
    return v;
  };
  CHECK(u64_at(6) == 2);
  CHECK(u64_at(14) == 2);
  CHECK(u64_at(22) == 2);
  CHECK(f64_at(30) == 0.5);
  CHECK(f64_at(38) == -1.0);
  CHECK(f64_at(46) == 2.0);
  CHECK(f64_at(54) == 0.25);
  CHECK(f64_at(62) == 0.5);
  CHECK(f64_at(70) == 1.0);
  CHECK(bytes[78] == 1);
  CHECK(f64_at(79) == 0.0);        // first node re
  CHECK(f64_at(79 + 16) == 1.0);   // second node re (x fastest)
  CHECK(f64_at(79 + 24) == -1.0);  // second node im
}

TEST_CASE("MSFLD1: round trip preserves fields bit-exactly") {
  Grid3 g = make_cube_grid({0.2, 0.1, 0.0}, 0.7, 9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  VectorField f(g);
  for (int c = 0; c < 3; ++c)
    for (cplx& z : f.v[c]) z = cplx(u(rng), u(rng));
  write_field("msfld1_rt.bin", f);
  AnyField back = read_field("msfld1_rt.bin");
  auto& fb = std::get<VectorField>(back);
  CHECK(fb.grid.same_layout(g));
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < g.size(); ++n) CHECK(fb.v[c][n] == f.v[c][n]);
}

TEST_CASE("scenario: invariant violations are rejected") {
  Scenario s = make_empty_scenario(1.0, 33, 1.0, 0.5);
  s.validate();

  Scenario bad = s;
  bad.q.v[0] = cplx(0.0, 0.5);  // Im q > 0
  CHECK_THROWS(bad.validate());

  Scenario bad2 = s;
  bad2.ball.center.z = -0.1;
  CHECK_THROWS(bad2.validate());

  Scenario bad3 = s;
  bad3.gamma1 = PlanePatch{-0.1, 0.1, -0.1, 0.1};  // strictly inside the ball footprint
  CHECK_THROWS(bad3.validate());
}
