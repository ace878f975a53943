#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "speclab/andrade.hpp"
#include "speclab/hausdorff.hpp"
#include "speclab/patch.hpp"

using namespace speclab;

namespace {

std::vector<double> dyadic(int k_first, int k_last) {
  std::vector<double> out;
  for (int k = k_first; k <= k_last; ++k) out.push_back(std::pow(2.0, -k));
  return out;
}

PointCloud seven_points(std::size_t copies = 1) {
  // Every pair differs by more than 0.08 in some coordinate, so each point
  // keeps its own grid box for delta <= 0.1.
  const double pts[7][2] = {{0.0, 0.0},  {0.25, 0.1}, {0.55, 0.3}, {0.8, 0.05},
                            {0.15, 0.65}, {0.5, 0.75}, {0.9, 0.9}};
  PointCloud cloud;
  cloud.dim = 2;
  for (std::size_t c = 0; c < copies; ++c)
    for (const auto& p : pts) cloud.push({p[0], p[1]});
  return cloud;
}

}  // namespace

TEST_CASE("doubling constant hits the closed-form oracles") {
  // Psi = t^2: the ratio is 4 at every sample.
  REQUIRE(doubling_constant(CoverGauge::square()) == Catch::Approx(4.0).margin(1e-12));
  // Psi = t^{3/2}: ratio 2^{3/2} everywhere.
  REQUIRE(doubling_constant(CoverGauge::power(0.5)) ==
          Catch::Approx(std::pow(2.0, 1.5)).margin(1e-12));
  // Psi = t^2|log t| on (0, 1/4): ratio 4(|log 2t|/|log t|) < 4, sup -> 4 as t -> 0.
  const double c_log = doubling_constant(CoverGauge::square_log(0.25));
  REQUIRE(c_log > 3.8);
  REQUIRE(c_log <= 4.0);
}

TEST_CASE("gauge evaluation enforces the validity radius") {
  const CoverGauge g = CoverGauge::square_log();
  REQUIRE(g.eval(0.1) == Catch::Approx(0.01 * std::abs(std::log(0.1))).margin(1e-15));
  REQUIRE_THROWS_AS(g.eval(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(g.eval(0.25), std::invalid_argument);
  REQUIRE_THROWS_AS(g.eval(-0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(CoverGauge::square_log(0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(CoverGauge::power(0.0), std::invalid_argument);
  // A gauge that does not vanish at 0 is not a covering gauge.
  REQUIRE_THROWS_AS(CoverGauge::custom([](double) { return 1.0; }, 0.25, "const"),
                    std::invalid_argument);
  const CoverGauge cubic =
      CoverGauge::custom([](double t) { return t * t * t; }, 2.0, "t^3");
  REQUIRE(cubic.eval(0.5) == Catch::Approx(0.125).margin(1e-15));
}

TEST_CASE("segment covering sums decay like delta |log delta|") {
  const PointCloud pts = sample_unit_segment(10000, 42);
  const CoverGauge g = CoverGauge::square_log();
  double prev = 1e9;
  for (int k = 4; k <= 10; ++k) {
    const double delta = std::pow(2.0, -k);
    const CoverEstimate est = cover_measure(pts, g, delta);
    // Boxes of side delta/sqrt(2) tile the segment: about sqrt(2)/delta of them.
    const double expect_cells = std::sqrt(2.0) * std::pow(2.0, k);
    REQUIRE(est.cardinality >= static_cast<std::size_t>(0.9 * expect_cells));
    REQUIRE(est.cardinality <= static_cast<std::size_t>(1.1 * expect_cells) + 2);
    REQUIRE(est.sum < prev);
    prev = est.sum;
  }
  REQUIRE(prev <= 0.02);  // the sum at delta = 2^-10
}

TEST_CASE("finite point set carries zero measure in any gauge") {
  const PointCloud pts = seven_points();
  const CoverGauge g = CoverGauge::square();
  double prev = 1e9;
  for (double delta : {0.1, 0.05, 0.02, 0.01, 0.005}) {
    const CoverEstimate grid = cover_measure(pts, g, delta, CoverStrategy::grid);
    REQUIRE(grid.cardinality == 7);
    REQUIRE(grid.sum == 7.0 * g.eval(delta));
    const CoverEstimate ball = cover_measure(pts, g, delta, CoverStrategy::greedy);
    REQUIRE(ball.cardinality == 7);
    REQUIRE(ball.sum == grid.sum);
    REQUIRE(grid.sum < prev);
    prev = grid.sum;
  }
  REQUIRE(prev <= 7.0 * 0.005 * 0.005 * 1.0000001);

  // Sampled with multiplicity the verdict machinery can certify the decay.
  const CoverReport rep =
      measure_limit(seven_points(600), g, {0.1, 0.05, 0.02, 0.01, 0.005});
  REQUIRE(rep.density_ok);
  REQUIRE(rep.verdict == MeasureVerdict::vanishing);
}

TEST_CASE("square covering sums stay pinned between packing bound and 2.5") {
  const PointCloud pts = sample_unit_square(20000, 42);
  const CoverGauge g = CoverGauge::square();
  const std::vector<double> deltas = dyadic(1, 5);

  MeasureOptions opt;
  opt.reference_volume = 1.0;
  const CoverReport rep = measure_limit(pts, g, deltas, opt);
  REQUIRE(rep.density_ok);
  const double four_over_pi = 4.0 / std::acos(-1.0);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    REQUIRE(rep.packing_bound[i] == Catch::Approx(four_over_pi).margin(1e-12));
    REQUIRE(rep.sums[i] >= rep.packing_bound[i]);
    REQUIRE(rep.sums[i] <= 2.5);
  }
  REQUIRE(rep.verdict == MeasureVerdict::positive);

  // Without a reference volume the flat trend still reads positive.
  const CoverReport heuristic = measure_limit(pts, g, deltas);
  REQUIRE(heuristic.verdict == MeasureVerdict::positive);
}

TEST_CASE("grid envelope is exactly monotone and dyadic covers nest") {
  const CoverGauge glog = CoverGauge::square_log();
  const CoverGauge gsq = CoverGauge::square();
  const PointCloud seg = sample_unit_segment(10000, 7);
  const PointCloud sq = sample_unit_square(20000, 7);

  const CoverReport a = measure_limit(seg, glog, dyadic(4, 10));
  for (std::size_t i = 1; i < a.envelope.size(); ++i) {
    REQUIRE(a.envelope[i] >= a.envelope[i - 1]);
    REQUIRE(a.cardinality[i] >= a.cardinality[i - 1]);  // halved boxes nest
  }
  // Decaying sums collapse the envelope onto the finest cover.
  for (double e : a.envelope) REQUIRE(e == a.sums.back());

  const CoverReport b = measure_limit(sq, gsq, dyadic(1, 5));
  for (std::size_t i = 1; i < b.envelope.size(); ++i) {
    REQUIRE(b.envelope[i] >= b.envelope[i - 1]);
    REQUIRE(b.cardinality[i] >= b.cardinality[i - 1]);
  }
}

TEST_CASE("pointwise smaller gauge gives a smaller sum on the same cover") {
  const PointCloud pts = sample_unit_square(5000, 11);
  const CoverGauge big = CoverGauge::square();
  const CoverGauge small = CoverGauge::power(2.0);  // t^3 <= t^2 below 1
  for (double delta : {0.3, 0.11, 0.04}) {
    const CoverEstimate e_big = cover_measure(pts, big, delta);
    const CoverEstimate e_small = cover_measure(pts, small, delta);
    REQUIRE(e_big.cardinality == e_small.cardinality);
    REQUIRE(e_small.sum <= e_big.sum);
  }
}

TEST_CASE("grid and greedy sums agree within the doubling constant") {
  const CoverGauge gsq = CoverGauge::square();
  const double c_sq = doubling_constant(gsq);
  const PointCloud seg = sample_unit_segment(10000, 3);
  const PointCloud sq = sample_unit_square(10000, 3);
  struct Probe {
    const PointCloud* pts;
    double delta;
  } probes[] = {{&seg, 1.0 / 64}, {&sq, 1.0 / 16}};
  for (const auto& p : probes) {
    const double grid = cover_measure(*p.pts, gsq, p.delta, CoverStrategy::grid).sum;
    const double ball = cover_measure(*p.pts, gsq, p.delta, CoverStrategy::greedy).sum;
    REQUIRE(grid <= c_sq * ball * (1 + 1e-9));
    REQUIRE(ball <= c_sq * grid * (1 + 1e-9));
  }
}

TEST_CASE("dilation scales square-gauge sums exactly") {
  const PointCloud pts = sample_unit_square(4000, 5);
  const CoverGauge g = CoverGauge::square(4.0);
  const double delta = 0.11;
  const CoverEstimate base = cover_measure(pts, g, delta);

  // Power-of-two dilation reproduces every box assignment bit for bit.
  const CoverEstimate doubled = cover_measure(pts.scaled(2.0), g, 2.0 * delta);
  REQUIRE(doubled.cardinality == base.cardinality);
  REQUIRE(doubled.sum == 4.0 * base.sum);

  const CoverEstimate tripled = cover_measure(pts.scaled(3.0), g, 3.0 * delta);
  REQUIRE(tripled.cardinality == base.cardinality);
  REQUIRE(tripled.sum == Catch::Approx(9.0 * base.sum).epsilon(1e-12));
}

TEST_CASE("greedy cover is a packing that covers the sample") {
  const PointCloud pts = sample_unit_square(3000, 9);
  const CoverGauge g = CoverGauge::square();
  const double delta = 0.2;
  const CoverEstimate est = cover_measure(pts, g, delta, CoverStrategy::greedy);
  REQUIRE(est.sum == static_cast<double>(est.cardinality) * g.eval(delta));

  // Centers form a delta/2-packing.
  for (std::size_t i = 0; i < est.balls.size(); ++i)
    for (std::size_t j = i + 1; j < est.balls.size(); ++j) {
      const double dx = est.balls[i].center[0] - est.balls[j].center[0];
      const double dy = est.balls[i].center[1] - est.balls[j].center[1];
      REQUIRE(std::sqrt(dx * dx + dy * dy) > 0.5 * delta);
    }
  // Balls of radius delta/2 around the centers cover every sample point.
  std::size_t hits = 0;
  for (const auto& b : est.balls) hits += b.hits;
  REQUIRE(hits == pts.count());
  for (std::size_t i = 0; i < pts.count(); ++i) {
    double best = 1e9;
    for (const auto& b : est.balls) {
      const double dx = pts.coord(i, 0) - b.center[0];
      const double dy = pts.coord(i, 1) - b.center[1];
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    REQUIRE(best <= 0.5 * delta * (1 + 1e-12));
  }
}

TEST_CASE("box-counting dimension recovers segment, square, and point") {
  const DimensionFit seg = dimension_fit(sample_unit_segment(10000, 13), dyadic(4, 10));
  REQUIRE(seg.ok);
  REQUIRE(seg.dimension == Catch::Approx(1.0).margin(0.1));

  const DimensionFit sq = dimension_fit(sample_unit_square(60000, 13), dyadic(1, 5));
  REQUIRE(sq.ok);
  REQUIRE(sq.dimension == Catch::Approx(2.0).margin(0.1));

  PointCloud lone;
  lone.dim = 2;
  lone.push({0.3, 0.4});
  const DimensionFit point = dimension_fit(lone, dyadic(1, 5));
  REQUIRE(point.ok);
  REQUIRE(std::abs(point.dimension) <= 1e-12);
  REQUIRE(point.rms <= 1e-12);

  REQUIRE_FALSE(dimension_fit(lone, dyadic(1, 4)).ok);          // too few scales
  REQUIRE_FALSE(dimension_fit(lone, {0.5, 0.5, 0.5, 0.5, 0.5}).ok);  // collapsed abscissa
}

TEST_CASE("measure_limit rejects malformed schedules and stale density") {
  const PointCloud pts = sample_unit_square(20000, 21);
  const CoverGauge g = CoverGauge::square();
  REQUIRE_THROWS_AS(measure_limit(pts, g, dyadic(1, 4)), std::invalid_argument);
  REQUIRE_THROWS_AS(measure_limit(pts, g, {0.1, 0.2, 0.3, 0.4, 0.5}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(cover_measure(pts, g, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(cover_measure(pts, g, 1.5), std::invalid_argument);
  REQUIRE_THROWS_AS(cover_measure(PointCloud{}, g, 0.1), std::invalid_argument);

  // A schedule finer than the sample density downgrades the verdict.
  const CoverReport rep = measure_limit(pts, g, dyadic(3, 7));
  REQUIRE_FALSE(rep.density_ok);
  REQUIRE(rep.verdict == MeasureVerdict::inconclusive);
}

TEST_CASE("Andrade limit-set sample reads positive in the cubic gauge") {
  // The escape-band image accumulates, over the u-sweep of wound tori, onto a
  // solid region; its boxes keep a large boundary-cell excess at desk scales,
  // so positivity is certified against the packing bound for a claimed volume
  // well below what the occupied boxes resolve (about 24 at delta ~ 0.17).
  const ConformalPatch patch = andrade_surface(AndradeParams{}, 1.0, 400.0);
  const PointCloud cloud = limit_set_sample(patch, 0.8, 120000, 99);
  const CoverGauge cubic =
      CoverGauge::custom([](double t) { return t * t * t; }, 4.0, "t^3");
  MeasureOptions opt;
  opt.reference_volume = 10.0;
  const CoverReport rep =
      measure_limit(cloud, cubic, {0.6, 0.48, 0.38, 0.30, 0.24}, opt);
  REQUIRE(rep.density_ok);
  for (std::size_t i = 0; i < rep.sums.size(); ++i) {
    REQUIRE(rep.packing_bound[i] == Catch::Approx(60.0 / std::acos(-1.0)).margin(1e-9));
    REQUIRE(rep.sums[i] >= rep.packing_bound[i]);
  }
  REQUIRE(rep.verdict == MeasureVerdict::positive);
}

TEST_CASE("cover reports round-trip through the CSV writers") {
  const PointCloud pts = sample_unit_square(2000, 17);
  const CoverGauge g = CoverGauge::square();
  MeasureOptions opt;
  opt.keep_balls = true;
  const CoverReport rep = measure_limit(pts, g, {0.4, 0.3, 0.22, 0.16, 0.12}, opt);
  REQUIRE(rep.covers.size() == 5);

  const std::string dir = "hausdorff_csv_test";
  std::remove((dir + "_sums.csv").c_str());
  write_cover_csv(rep, dir + "_sums.csv");
  write_cover_balls_csv(rep.covers.front(), dir + "_balls.csv");

  std::ifstream sums(dir + "_sums.csv");
  std::string line;
  REQUIRE(std::getline(sums, line));
  REQUIRE(line == "delta,sum,envelope,cardinality,occupancy,packing_bound");
  std::size_t rows = 0;
  while (std::getline(sums, line)) ++rows;
  REQUIRE(rows == 5);

  std::ifstream balls(dir + "_balls.csv");
  REQUIRE(std::getline(balls, line));
  REQUIRE(line == "x0,x1,radius,hits");
  rows = 0;
  while (std::getline(balls, line)) ++rows;
  REQUIRE(rows == rep.covers.front().cardinality);
}

TEST_CASE("packing lower bound matches the closed forms") {
  const double pi = std::acos(-1.0);
  REQUIRE(packing_lower_bound(CoverGauge::square(), 0.1, 2, 1.0) ==
          Catch::Approx(4.0 / pi).margin(1e-12));
  // Psi = t^3 in 3-space: 2^3 V / (4 pi / 3) = 6 V / pi.
  const CoverGauge cubic = CoverGauge::power(2.0);
  REQUIRE(packing_lower_bound(cubic, 0.2, 3, 2.0) ==
          Catch::Approx(12.0 / pi).margin(1e-12));
  // Psi = t^2 |log t|: the infimum of Psi(t)/t^2 over t <= delta sits at delta.
  REQUIRE(packing_lower_bound(CoverGauge::square_log(), 0.1, 2, 1.0) ==
          Catch::Approx(std::abs(std::log(0.1)) * 4.0 / pi).margin(1e-12));
  REQUIRE(packing_lower_bound(CoverGauge::square(), 0.1, 2, 0.0) == 0.0);
}
