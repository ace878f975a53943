#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "speclab/andrade.hpp"
#include "speclab/labyrinth.hpp"
#include "speclab/patch.hpp"

using namespace speclab;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("flat disk patch: factor, region, immersion") {
  auto disk = flat_disk(1.0);
  REQUIRE(disk.lambda(0.3, -0.4) == 1.0);
  REQUIRE(disk.inside(0.999, 0.0));
  REQUIRE_FALSE(disk.inside(0.8, 0.7));
  REQUIRE(disk.immersion(0.25, -0.5) == Eigen::Vector3d(0.25, -0.5, 0.0));
  REQUIRE_THROWS_AS(flat_disk(-1.0), std::invalid_argument);
}

TEST_CASE("flat disk area matches pi by midpoint quadrature") {
  REQUIRE(patch_area(flat_disk(1.0), 1.0 / 512) == Catch::Approx(kPi).epsilon(5e-3));
}

TEST_CASE("hyperbolic disk: factor at origin and area oracle") {
  auto disk = hyperbolic_disk(0.01);
  REQUIRE(disk.lambda(0.0, 0.0) == Catch::Approx(2.0));
  double area_half = patch_area(disk, 1.0 / 1024, [](double u, double v) {
    return u * u + v * v <= 0.25;
  });
  REQUIRE(area_half == Catch::Approx(4 * kPi / 3).epsilon(5e-3));
  REQUIRE_THROWS_AS(hyperbolic_disk(0.3), std::invalid_argument);
  REQUIRE_THROWS_AS(hyperbolic_disk(0.0), std::invalid_argument);
}

TEST_CASE("conformal scaling: constant factor scales areas quadratically") {
  auto disk = flat_disk(1.0);
  auto scaled = disk;
  scaled.lambda = [](double, double) { return 3.0; };
  double a1 = patch_area(disk, 1.0 / 128);
  double a9 = patch_area(scaled, 1.0 / 128);
  REQUIRE(a9 == Catch::Approx(9.0 * a1));
}

TEST_CASE("Andrade factor formula and v-independence") {
  AndradeParams params;
  auto patch = andrade_surface(params, 1.0, 5.0);
  double d = params.d();
  for (double u : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
    double expect = d * std::exp(u) + (d * d / params.r2) * std::exp(params.beta() * u);
    REQUIRE(patch.lambda(u, 0.0) == Catch::Approx(expect).epsilon(1e-14));
    REQUIRE(patch.lambda(u, 2.5) == patch.lambda(u, -4.0));
  }
  REQUIRE_THROWS_AS(andrade_surface({2.0, 1.0}, 1.0, 5.0), std::invalid_argument);
  REQUIRE_THROWS_AS(andrade_surface(params, 1.5, 5.0), std::invalid_argument);
}

TEST_CASE("Andrade conformality residual vanishes and metric is conformal") {
  AndradeParams params;
  auto patch = andrade_surface(params, 1.0, 5.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick_u(-1.0, 1.0), pick_v(-5.0, 5.0);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 20; ++i) {
    double u = pick_u(rng), v = pick_v(rng);
    REQUIRE(andrade_conformality_residual(params, u, v) <= 1e-10);
    pts.emplace_back(u, v);
  }
  auto metric = metric_consistency(patch, pts);
  REQUIRE(metric.max_scale_dev <= 1e-7);
  REQUIRE(metric.max_cross <= 1e-7);
}

TEST_CASE("Andrade coordinates are discretely harmonic") {
  AndradeParams params;
  auto patch = andrade_surface(params, 1.0, 5.0);
  const double s = 1e-2;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pick_u(-0.9, 0.9), pick_v(-4.5, 4.5);
  for (int i = 0; i < 50; ++i) {
    double u = pick_u(rng), v = pick_v(rng);
    Eigen::Vector3d lap = (patch.immersion(u + s, v) + patch.immersion(u - s, v) +
                           patch.immersion(u, v + s) + patch.immersion(u, v - s) -
                           4.0 * patch.immersion(u, v)) /
                          (s * s);
    REQUIRE(lap.cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("Andrade factor respects its pointwise exponential floor") {
  AndradeParams params;
  for (double u = -1.0; u <= 1.0; u += 0.05)
    REQUIRE(andrade_lambda(params, u) >= andrade_lambda_floor(params, u));
}

TEST_CASE("Andrade curvature: negative, v-independent, bounded") {
  AndradeParams params;
  double sup_abs = 0;
  for (double u = -1.0; u <= 1.0; u += 0.1) {
    double k0 = andrade_curvature(params, u, 0.0);
    double k1 = andrade_curvature(params, u, 3.7);
    REQUIRE(k0 < 0);
    REQUIRE(std::abs(k0 - k1) <= 1e-6);
    sup_abs = std::max(sup_abs, std::abs(k0));
  }
  REQUIRE(std::isfinite(sup_abs));
  REQUIRE(sup_abs < 10.0);
}

TEST_CASE("Andrade curvature matches the fitted closed form") {
  AndradeParams params;
  auto fit = fit_andrade_curvature(params, 1.0);
  double d = params.d();
  double c1_expect = (1.0 + d / params.r2) * (1.0 + d / params.r2) / (d * params.r2);
  double c2_expect = d / params.r2;
  REQUIRE(fit.c2 == Catch::Approx(c2_expect).margin(1e-5));
  REQUIRE(fit.c1 == Catch::Approx(c1_expect).epsilon(1e-4));
  REQUIRE(fit.max_rel_residual <= 1e-5);

  // the derived coefficients reproduce the finite-difference curvature directly
  for (double u : {-0.8, -0.2, 0.4, 0.9}) {
    double denom = std::exp(fit.p * u) + c2_expect * std::exp(fit.q * u);
    double closed = -c1_expect / std::pow(denom, 4.0);
    REQUIRE(andrade_curvature(params, u, 0.0) == Catch::Approx(closed).epsilon(1e-5));
  }
}

TEST_CASE("labyrinth patch: metric band and constants") {
  auto params = LabyrinthParams::from_index(1);
  REQUIRE(params.r_n == 1.0);
  REQUIRE(params.c_n == 1.0);
  auto patch = labyrinth_patch(params);
  double Cn = labyrinth_Cn(params);
  REQUIRE(Cn == Catch::Approx((std::exp(0.0) + std::exp(-2.0)) / 2));
  for (double u : {0.0, 0.5, 1.0})
    for (double v : {0.0, 2.0, 4.0}) {
      double ratio = patch.lambda(u, v) / Cn;
      REQUIRE(ratio >= 1.0);
      REQUIRE(ratio <= std::exp(2.0));
    }
  REQUIRE(labyrinth_crossing_bound(params) == Catch::Approx(0.5));
}

TEST_CASE("labyrinth constant surrogate sits at ratio e") {
  auto params = LabyrinthParams::from_index(2);
  params.eps = {0.0, 0.0};
  auto patch = labyrinth_patch(params);
  double ratio = patch.lambda(0.3, 0.9) / labyrinth_Cn(params);
  REQUIRE(ratio == Catch::Approx(std::exp(1.0)));
}

TEST_CASE("labyrinth rejects a surrogate that breaks the band hypothesis") {
  auto params = LabyrinthParams::from_index(1);
  params.eps = {1.0, 0.0};
  REQUIRE_THROWS_AS(labyrinth_patch(params), std::invalid_argument);
}

TEST_CASE("labyrinth crossing sums diverge like a harmonic series") {
  auto sums = labyrinth_divergence_diagnostic(3200);
  auto at = [&](int n) {
    for (const auto& [idx, s] : sums)
      if (idx == n) return s;
    FAIL("missing index");
    return 0.0;
  };
  double inc1 = at(400) - at(200);
  double inc2 = at(800) - at(400);
  double inc3 = at(3200) - at(1600);
  REQUIRE(inc1 > 0.1);
  REQUIRE(inc2 > 0.1);
  REQUIRE(inc3 > 0.1);
  REQUIRE(inc2 / inc1 == Catch::Approx(1.0).margin(0.05));
  REQUIRE(inc3 / inc2 == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("limit-set sampling hugs the flat disk rim") {
  auto disk = flat_disk(1.0);
  const double margin = 0.05;
  auto cloud = limit_set_sample(disk, margin, 400);
  REQUIRE(cloud.count() == 400);
  for (std::size_t i = 0; i < cloud.count(); ++i) {
    double r = std::hypot(cloud.coord(i, 0), cloud.coord(i, 1));
    REQUIRE(r <= 1.0);
    REQUIRE(r >= 1.0 - margin - 1e-12);
    REQUIRE(cloud.coord(i, 2) == 0.0);
  }
}

TEST_CASE("limit-set sampling of a collapsing annulus lands near the circle") {
  ConformalPatch mock;
  mock.domain = {-2.0, 2.0, -2.0, 2.0};
  mock.lambda = [](double, double) { return 1.0; };
  mock.region = [](double u, double v) {
    double r = std::hypot(u, v);
    return r > 1.0 && r < 2.0;
  };
  mock.immersion = [](double u, double v) {
    double r = std::hypot(u, v);
    double rho = 1.0 + 2.0 * (r - 1.0) * (2.0 - r);  // both rims map to radius 1
    return Eigen::Vector3d(u / r * rho, v / r * rho, 0.0);
  };
  const double margin = 0.05;
  auto cloud = limit_set_sample(mock, margin, 300);
  for (std::size_t i = 0; i < cloud.count(); ++i) {
    double r = std::hypot(cloud.coord(i, 0), cloud.coord(i, 1));
    REQUIRE(std::abs(r - 1.0) <= 2 * margin);
  }
}

TEST_CASE("limit-set sampling fails on an unreachable collar") {
  auto disk = flat_disk(1.0);
  disk.region = [](double u, double v) { return u * u + v * v < 1e-8; };
  REQUIRE_THROWS_AS(limit_set_sample(disk, 1e-6, 10), numerical_error);
}

TEST_CASE("Andrade limit-set samples stay Lipschitz-close to the edge curves") {
  AndradeParams params;
  auto patch = andrade_surface(params, 1.0, 5.0);
  const double margin = 0.02;
  std::vector<std::pair<double, double>> where;
  auto cloud = limit_set_sample(patch, margin, 300, 99, &where);
  double lam_max = 0;
  for (double u = -1.0; u <= 1.0; u += 0.01)
    lam_max = std::max(lam_max, andrade_lambda(params, u));

  std::size_t edge_hits = 0;
  for (std::size_t i = 0; i < where.size(); ++i) {
    auto [u, v] = where[i];
    if (1.0 - std::abs(u) > margin) continue;  // v-truncation collar, not an escape direction
    ++edge_hits;
    double edge_u = u > 0 ? 1.0 : -1.0;
    Eigen::Vector3d sample(cloud.coord(i, 0), cloud.coord(i, 1), cloud.coord(i, 2));
    double gap = (sample - patch.immersion(edge_u, v)).norm();
    REQUIRE(gap <= lam_max * margin * (1 + 1e-9));
  }
  REQUIRE(edge_hits > 100);
}

TEST_CASE("patch CSV export includes immersion columns when present") {
  auto dir = std::filesystem::temp_directory_path() / "speclab_patch_csv";
  std::filesystem::create_directories(dir);
  write_patch_csv(flat_disk(1.0), 16, 16, dir / "disk.csv");
  std::ifstream in(dir / "disk.csv");
  std::string header;
  REQUIRE(std::getline(in, header));
  REQUIRE(header == "u,v,x,y,z");
  write_patch_csv(hyperbolic_disk(0.1), 16, 16, dir / "hyp.csv");
  std::ifstream in2(dir / "hyp.csv");
  REQUIRE(std::getline(in2, header));
  REQUIRE(header == "u,v,lambda");
  std::filesystem::remove_all(dir);
}
