#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "speclab/eigensolve.hpp"
#include "speclab/labyrinth.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;

namespace {

ConformalPatch unit_square() {
  ConformalPatch patch;
  patch.domain = {0.0, 1.0, 0.0, 1.0};
  patch.lambda = [](double, double) { return 1.0; };
  patch.descriptor = "unit-square";
  return patch;
}

// First Dirichlet eigenvalue of the flat annulus a < |z| < b by bisection on
// the radial cross term J0(s a) Y0(s b) - J0(s b) Y0(s a).
double annulus_tone(double a, double b) {
  auto cross = [&](double s) {
    return std::cyl_bessel_j(0.0, s * a) * std::cyl_neumann(0.0, s * b) -
           std::cyl_bessel_j(0.0, s * b) * std::cyl_neumann(0.0, s * a);
  };
  double lo = 1e-3, hi = 1e-3;
  double prev = cross(lo);
  for (;;) {
    hi += 0.05;
    REQUIRE(hi < 1e3);
    double cur = cross(hi);
    if (prev * cur < 0) break;
    lo = hi;
    prev = cur;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (cross(lo) * cross(mid) <= 0) hi = mid;
    else lo = mid;
  }
  double s = 0.5 * (lo + hi);
  return s * s;
}

}  // namespace

TEST_CASE("flat unit square assembles the textbook 5-point stencil") {
  auto dis = discretize(unit_square(), 1.0 / 32);
  REQUIRE(dis.nx == 32);
  REQUIRE(dis.ny == 32);
  REQUIRE(dis.n() == 31 * 31);
  REQUIRE(dis.clipped_cuts == 0);

  const double cell = (1.0 / 32) * (1.0 / 32);
  for (std::size_t p = 0; p < dis.n(); ++p)
    REQUIRE(dis.mass[static_cast<Eigen::Index>(p)] == Catch::Approx(cell).epsilon(1e-14));

  std::int64_t mid = dis.node_at(16, 16);
  REQUIRE(mid >= 0);
  std::size_t offdiag = 0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(dis.stiffness, mid); it; ++it) {
    if (it.row() == it.col()) REQUIRE(it.value() == Catch::Approx(4.0).margin(1e-14));
    else {
      REQUIRE(it.value() == Catch::Approx(-1.0).margin(1e-14));
      ++offdiag;
    }
  }
  REQUIRE(offdiag == 4);
}

TEST_CASE("unit square ground state matches the exact discrete eigenvalue") {
  const std::size_t n = 64;
  auto dis = discretize(unit_square(), 1.0 / static_cast<double>(n));
  EigenOptions opt;
  opt.tol = 1e-12;
  auto res = smallest_eigs(dis, opt);
  // separable 5-point eigenvalue: mu = (4 - 4 cos(pi/n)) / dx^2
  const double dx = 1.0 / static_cast<double>(n);
  const double exact = (4.0 - 4.0 * std::cos(M_PI / static_cast<double>(n))) / (dx * dx);
  REQUIRE(res.values[0] == Catch::Approx(exact).epsilon(1e-10));
  REQUIRE(res.values[0] == Catch::Approx(2.0 * M_PI * M_PI).epsilon(0.01));
}

TEST_CASE("square spectrum: ascending values, residual contract, Rayleigh consistency") {
  auto dis = discretize(unit_square(), 1.0 / 96);
  EigenOptions opt;
  opt.k = 5;
  opt.tol = 1e-10;
  auto res = smallest_eigs(dis, opt);
  REQUIRE(res.converged);
  for (int b = 1; b < 5; ++b) REQUIRE(res.values[b] >= res.values[b - 1]);
  // continuum: pi^2 {2, 5, 5, 8, 10}
  REQUIRE(res.values[1] == Catch::Approx(5.0 * M_PI * M_PI).epsilon(0.01));
  REQUIRE(res.values[2] == Catch::Approx(5.0 * M_PI * M_PI).epsilon(0.01));
  REQUIRE(res.values[3] == Catch::Approx(8.0 * M_PI * M_PI).epsilon(0.01));
  for (int b = 0; b < 5; ++b) {
    REQUIRE(res.residuals[b] <= opt.tol * std::max(1.0, res.values[b]));
    Eigen::VectorXd v = res.vectors.col(b);
    double rq = v.dot(dis.stiffness * v) / v.dot(dis.mass.cwiseProduct(v));
    REQUIRE(std::abs(rq - res.values[b]) <= 10 * opt.tol * std::max(1.0, res.values[b]));
  }
}

TEST_CASE("flat disk eigenvalue lands on the Bessel oracle at 256^2") {
  const double j01sq = 5.783185962946785;  // first zero of J0, squared
  auto dis = discretize(flat_disk(1.0), 1.0 / 256);
  auto res = smallest_eigs(dis);
  REQUIRE(std::abs(res.values[0] - j01sq) / j01sq <= 2e-4);
}

TEST_CASE("hyperbolic mass entries follow the conformal factor formula") {
  auto dis = discretize(hyperbolic_disk(0.01), 1.0 / 512);
  const double dx = dis.dx;
  for (std::size_t p = 0; p < dis.n(); p += dis.n() / 17) {
    auto [u, v] = dis.position(p);
    double lam = 2.0 / (1.0 - (u * u + v * v));
    REQUIRE(dis.mass[static_cast<Eigen::Index>(p)] ==
            Catch::Approx(lam * lam * dx * dx).epsilon(1e-12));
  }
}

TEST_CASE("excluding everything is rejected") {
  REQUIRE_THROWS_AS(discretize(unit_square(), 1.0 / 32, [](double, double) { return true; }),
                    std::invalid_argument);
}

TEST_CASE("Dirichlet domain monotonicity across nested squares") {
  ConformalPatch big = unit_square();
  big.domain = {0.0, 1.25, 0.0, 1.25};
  auto small_tone = fundamental_tone(unit_square(), 1.0 / 64);
  auto big_tone = fundamental_tone(big, 1.25 / 80);
  REQUIRE(small_tone.value > big_tone.value);
}

TEST_CASE("conformal scaling moves every eigenvalue by c^-2 exactly") {
  ConformalPatch scaled = unit_square();
  scaled.lambda = [](double, double) { return 3.0; };
  auto base = discretize(unit_square(), 1.0 / 48);
  auto dis = discretize(scaled, 1.0 / 48);
  EigenOptions opt;
  opt.k = 3;
  opt.tol = 1e-11;
  auto a = smallest_eigs(base, opt);
  auto b = smallest_eigs(dis, opt);
  for (int i = 0; i < 3; ++i)
    REQUIRE(b.values[i] == Catch::Approx(a.values[i] / 9.0).epsilon(1e-9));
}

TEST_CASE("fundamental tone with an excluded core matches the annulus oracle") {
  const double oracle = annulus_tone(0.5, 1.0);
  auto tone = fundamental_tone(flat_disk(1.0), 1.0 / 128, [](double u, double v) {
    return u * u + v * v <= 0.25;
  });
  REQUIRE(std::abs(tone.value - oracle) / oracle <= 5e-3);

  auto whole = fundamental_tone(flat_disk(1.0), 1.0 / 128);
  REQUIRE(tone.value > whole.value);  // domain monotonicity under exclusion
}

TEST_CASE("persson sweep on the flat disk rises and rejects non-nested input") {
  std::vector<RegionPredicate> levels;
  for (int l = 1; l <= 3; ++l) {
    double r = 1.0 - std::pow(2.0, -l);
    levels.push_back([r](double u, double v) { return u * u + v * v <= r * r; });
  }
  auto rep = persson_sweep(flat_disk(1.0), 1.0 / 64, levels);
  REQUIRE(rep.lambda_star.size() == 3);
  REQUIRE(rep.lambda_star[1] > rep.lambda_star[0]);
  REQUIRE(rep.lambda_star[2] > rep.lambda_star[1]);
  REQUIRE(rep.running_sup[2] == rep.lambda_star[2]);

  std::vector<RegionPredicate> reversed{levels[1], levels[0]};
  REQUIRE_THROWS_AS(persson_sweep(flat_disk(1.0), 1.0 / 64, reversed),
                    std::invalid_argument);
}

TEST_CASE("barta equality: the ground state reproduces mu_1 to 1e-8") {
  auto dis = discretize(flat_disk(1.0), 1.0 / 64);
  EigenOptions opt;
  opt.tol = 1e-9;
  opt.refine_steps = 10;
  auto res = smallest_eigs(dis, opt);
  Eigen::VectorXd w = res.vectors.col(0);
  if (w.sum() < 0) w = -w;  // fix the Perron sign
  auto rep = barta_bound(dis, w);
  REQUIRE(rep.min_ratio == Catch::Approx(res.values[0]).margin(1e-8));
  REQUIRE(rep.max_ratio == Catch::Approx(res.values[0]).margin(1e-8));
}

TEST_CASE("barta with the radial cosine matches the 1-D formula") {
  // w = cos(pi r / 2): (-Delta w)/w = (pi/2)^2 + (pi/2) tan(pi r/2)/r, inf at r=0.
  const double inf_analytic = 2.0 * (M_PI / 2.0) * (M_PI / 2.0);
  auto w = [](double u, double v) {
    return std::cos(0.5 * M_PI * std::sqrt(u * u + v * v));
  };
  auto rep = barta_bound(flat_disk(1.0), 1.0 / 128, w, [](double u, double v) {
    return u * u + v * v <= 0.81;
  });
  REQUIRE(rep.min_ratio == Catch::Approx(inf_analytic).margin(1e-3));
  REQUIRE(std::hypot(rep.arg_u, rep.arg_v) <= 0.05);
}

TEST_CASE("barta stays below the fundamental tone for random positive w") {
  auto dis = discretize(flat_disk(1.0), 1.0 / 48);
  auto res = smallest_eigs(dis);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> jitter(0.0, 0.5);
  Eigen::VectorXd w(dis.n());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 1.0 + jitter(rng);
  auto rep = barta_bound(dis, w);
  REQUIRE(rep.min_ratio <= res.values[0] * (1 + 1e-9) + 1e-12);
}

TEST_CASE("nonpositive w is rejected with the collar included") {
  auto dis = discretize(unit_square(), 1.0 / 32);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(dis.n());
  w[static_cast<Eigen::Index>(dis.n() / 2)] = 0.0;
  REQUIRE_THROWS_AS(barta_bound(dis, w), std::invalid_argument);
}

TEST_CASE("flat geodesics overestimate Euclidean length by at most the chamfer bias") {
  auto dis = discretize(flat_disk(1.0), 1.0 / 64);
  auto src = nearest_node(dis, 0.0, 0.0);
  auto dist = geodesic_distance(dis, src);
  double worst = 0.0;
  for (std::size_t p = 0; p < dis.n(); ++p) {
    auto [u, v] = dis.position(p);
    double euclid = std::hypot(u, v);
    if (euclid < 0.2) continue;
    double ratio = dist[p] / euclid;
    REQUIRE(ratio >= 1.0 - 1e-9);
    worst = std::max(worst, ratio - 1.0);
  }
  // asymptotic 8-neighbor metrication constant: sec(pi/8) + (sqrt2-1)-ish = 8.24%
  REQUIRE(worst <= 0.083);
  REQUIRE(worst >= 0.05);  // the bias is real, not an artifact of a lucky grid
}

TEST_CASE("constant conformal factor scales distances exactly") {
  ConformalPatch scaled = unit_square();
  scaled.lambda = [](double, double) { return 2.5; };
  auto flat = discretize(unit_square(), 1.0 / 40);
  auto dis = discretize(scaled, 1.0 / 40);
  auto d0 = geodesic_distance(flat, nearest_node(flat, 0.5, 0.5));
  auto d1 = geodesic_distance(dis, nearest_node(dis, 0.5, 0.5));
  for (std::size_t p = 0; p < dis.n(); p += 37)
    REQUIRE(d1[p] == Catch::Approx(2.5 * d0[p]).margin(1e-12));
}

TEST_CASE("disconnected regions report infinite distances") {
  ConformalPatch split = unit_square();
  split.region = [](double u, double) { return u < 0.4 || u > 0.6; };
  auto dis = discretize(split, 1.0 / 64);
  auto dist = geodesic_distance(dis, nearest_node(dis, 0.2, 0.5));
  auto far_node = nearest_node(dis, 0.8, 0.5);
  REQUIRE(std::isinf(dist[far_node]));
  REQUIRE(dist[nearest_node(dis, 0.3, 0.5)] < 1.0);
}

TEST_CASE("labyrinth crossing distance clears the paper's lower bound") {
  auto params = LabyrinthParams::from_index(2);
  auto patch = labyrinth_patch(params);
  const double dx = params.r_n / 32.0;
  auto dis = discretize(patch, dx);
  auto src = nearest_node(dis, dx, 2.0 * params.r_n);
  auto dist = geodesic_distance(dis, src);
  double crossing = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < dis.n(); ++p) {
    auto [u, v] = dis.position(p);
    if (u >= params.r_n - 1.5 * dx) crossing = std::min(crossing, dist[p]);
  }
  REQUIRE(std::isfinite(crossing));
  REQUIRE(crossing >= labyrinth_crossing_bound(params));
}

TEST_CASE("ball property on a flat disk reproduces the area ratio") {
  auto dis = discretize(flat_disk(2.0), 1.0 / 48);
  auto rep = ball_property_check(dis, {{0.0, 0.0}}, 1.0, 0.5);
  REQUIRE(rep.ratio.size() == 1);
  REQUIRE(rep.ratio[0] == Catch::Approx(0.25).margin(0.02));
  REQUIRE(rep.C == Catch::Approx(4.0).margin(0.3));
  REQUIRE(rep.bound == Catch::Approx(rep.C * 4.0).epsilon(1e-12));
  // the proof's negativity display at lambda = 1.1 * bound
  REQUIRE(rep.negativity_threshold < 1.1 * rep.bound);
  REQUIRE(rep.i_lambda(0, 1.1 * rep.bound) < 0.0);
}

TEST_CASE("ball property is center-relabel invariant and rejects overlap") {
  ConformalPatch strip = unit_square();
  strip.domain = {0.0, 6.0, 0.0, 3.0};
  auto dis = discretize(strip, 1.0 / 24);
  std::vector<std::pair<double, double>> centers{{1.5, 1.5}, {4.5, 1.5}};
  std::vector<std::pair<double, double>> swapped{{4.5, 1.5}, {1.5, 1.5}};
  auto a = ball_property_check(dis, centers, 1.0, 0.5);
  auto b = ball_property_check(dis, swapped, 1.0, 0.5);
  REQUIRE(a.C == Catch::Approx(b.C).epsilon(1e-12));
  REQUIRE(a.bound == Catch::Approx(b.bound).epsilon(1e-12));

  std::vector<std::pair<double, double>> close{{2.0, 1.5}, {3.5, 1.5}};
  REQUIRE_THROWS_AS(ball_property_check(dis, close, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("witness builder: positive measured bound on the flat disk") {
  auto patch = flat_disk(1.0);
  WitnessConfig cfg;
  cfg.r1 = 1.0 / 64;
  cfg.theta = 1.0;
  cfg.gauge = default_gauge_S(1.0);
  cfg.F = [](const Eigen::Vector3d& x) { return 0.5 * (x.squaredNorm() - 1.0); };
  cfg.boundary_distance = [](const Eigen::Vector3d& x) { return 1.0 - x.norm(); };
  cfg.convexity_c = 1.0;
  cfg.rho_max = 2.05;
  for (int j = 0; j < 4; ++j) {
    double ang = 2.0 * M_PI * j / 4.0;
    cfg.cover.push_back({{std::cos(ang), std::sin(ang), 0.0}, cfg.r1});
  }
  auto rep = barta_witness(patch, cfg.r1 / 2.0, cfg);
  REQUIRE(rep.w1_min > 0.0);
  REQUIRE(rep.min_ratio > 0.0);
  REQUIRE(rep.region_nodes > 1000);
  REQUIRE(rep.k1 == 4);

  // constant baseline: (-Delta c)/c = 0, strictly below the witness bound
  auto baseline = barta_bound(patch, cfg.r1 / 2.0, [](double, double) { return 1.0; });
  REQUIRE(rep.min_ratio > baseline.min_ratio);
  REQUIRE(baseline.min_ratio == Catch::Approx(0.0).margin(1e-9));

  // the witness closure itself is exported and positive
  REQUIRE(rep.w1(0.0, 0.0) > 0.0);
}

TEST_CASE("witness preconditions: cover size, radius cap, gauge sum") {
  auto patch = flat_disk(1.0);
  WitnessConfig cfg;
  cfg.r1 = 1.0 / 64;
  cfg.theta = 1.0;
  cfg.gauge = default_gauge_S(1.0);
  cfg.F = [](const Eigen::Vector3d& x) { return 0.5 * (x.squaredNorm() - 1.0); };
  cfg.boundary_distance = [](const Eigen::Vector3d& x) { return 1.0 - x.norm(); };
  cfg.convexity_c = 1.0;
  cfg.rho_max = 2.05;

  cfg.cover = {{{1.0, 0.0, 0.0}, cfg.r1}};
  REQUIRE_THROWS_AS(barta_witness(patch, cfg.r1 / 2.0, cfg), std::invalid_argument);

  cfg.cover = {{{1.0, 0.0, 0.0}, cfg.r1}, {{-1.0, 0.0, 0.0}, 2.0 * cfg.r1}};
  REQUIRE_THROWS_AS(barta_witness(patch, cfg.r1 / 2.0, cfg), std::invalid_argument);

  cfg.cover.clear();
  for (int j = 0; j < 40; ++j) {
    double ang = 2.0 * M_PI * j / 40.0;
    cfg.cover.push_back({{std::cos(ang), std::sin(ang), 0.0}, cfg.r1});
  }
  REQUIRE_THROWS_AS(barta_witness(patch, cfg.r1 / 2.0, cfg), std::invalid_argument);
}

