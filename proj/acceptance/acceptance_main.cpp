// Acceptance gate: runs every catalog criterion at its stated tolerance and
// runtime budget, prints one pass/fail line per criterion, and exits with the
// number of failures. All thresholds are pinned here; nothing is calibrated
// at run time.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "speclab/andrade.hpp"
#include "speclab/barrier.hpp"
#include "speclab/discretize.hpp"
#include "speclab/eigensolve.hpp"
#include "speclab/hausdorff.hpp"
#include "speclab/labyrinth.hpp"
#include "speclab/patch.hpp"
#include "speclab/pointcloud.hpp"
#include "speclab/radial.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& clause) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += clause;
    }
  }

  void note(const std::string& clause) {
    if (!detail.empty()) detail += "; ";
    detail += clause;
  }
};

struct Gate {
  int failed = 0;

  template <typename Body>
  void criterion(const char* id, double budget_s, Body&& body) {
    Outcome out;
    const double t0 = now_s();
    try {
      body(out);
    } catch (const std::exception& e) {
      out.ok = false;
      out.note(std::string("exception: ") + e.what());
    }
    const double elapsed = now_s() - t0;
    const bool in_budget = elapsed < budget_s;
    const bool pass = out.ok && in_budget;
    if (!in_budget) out.note(fmt("runtime %.1fs exceeds budget %.0fs", elapsed, budget_s));
    std::printf("criterion %-3s %s  (%6.1fs / %.0fs)  %s\n", id, pass ? "PASS" : "FAIL",
                elapsed, budget_s, out.detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
  }
};

// ---------------------------------------------------------------------------

void c1_ode_oracle(Outcome& out) {
  const auto model = solve_h(CurvatureBound::constant(1.0, 5.0), 5.0, 1e-3);
  double worst = 0.0;
  for (std::size_t i = 1; i < model.t.size(); ++i)
    worst = std::max(worst,
                     std::abs(model.h[i] - std::sinh(model.t[i])) / std::sinh(model.t[i]));
  const double mu_err = std::abs(mu(model, 5.0) - std::tanh(5.0));
  out.check(worst <= 1e-6, fmt("h vs sinh rel %.2e > 1e-6", worst));
  out.check(mu_err <= 1e-6, fmt("mu(5) vs tanh(5) err %.2e > 1e-6", mu_err));
  out.note(fmt("h rel %.1e, mu err %.1e", worst, mu_err));
}

void c2_disk_tone(Outcome& out) {
  const double j01_sq = 5.783185962946785;
  EigenOptions opt;
  const auto coarse = smallest_eigs(discretize(flat_disk(1.0), 2.0 / 256), opt);
  const double rel_coarse = std::abs(coarse.values[0] - j01_sq) / j01_sq;
  const auto fine = smallest_eigs(discretize(flat_disk(1.0), 2.0 / 512), opt);
  const double rel_fine = std::abs(fine.values[0] - j01_sq) / j01_sq;
  out.check(coarse.converged && fine.converged, "eigensolver did not converge");
  out.check(rel_coarse <= 1e-2, fmt("256^2 rel %.2e > 1e-2", rel_coarse));
  out.check(rel_fine <= 2.5e-3, fmt("512^2 rel %.2e > 2.5e-3", rel_fine));
  out.note(fmt("mu1 %.6f/%.6f rel %.1e/%.1e", coarse.values[0], fine.values[0], rel_coarse,
               rel_fine));
}

void c3_barta_equality(Outcome& out) {
  EigenOptions opt;
  opt.tol = 1e-9;
  opt.refine_steps = 12;
  auto gap_of = [&](const ConformalPatch& patch, double dx, const char* tag) {
    const auto dis = discretize(patch, dx);
    const auto res = smallest_eigs(dis, opt);
    out.check(res.converged, fmt("%s: eigensolver did not converge", tag));
    Eigen::VectorXd w = res.vectors.col(0);
    if (w.sum() < 0) w = -w;
    const auto rep = barta_bound(dis, w);
    const double gap =
        std::max(std::abs(res.values[0] - rep.min_ratio), std::abs(rep.max_ratio - res.values[0]));
    out.check(gap <= 1e-8, fmt("%s: barta gap %.2e > 1e-8", tag, gap));
    return gap;
  };
  const double g1 = gap_of(flat_disk(1.0), 1.0 / 48, "flat");
  const double g2 = gap_of(hyperbolic_disk(0.05), 1.0 / 64, "hyperbolic");
  const double g3 = gap_of(andrade_surface(AndradeParams{}, 1.0, 8.0), 1.0 / 48, "andrade");
  out.note(fmt("gaps %.1e / %.1e / %.1e", g1, g2, g3));
}

void c4_flat_subharmonic(Outcome& out) {
  const auto model = solve_h(CurvatureBound::constant(0.0, 2.2), 2.2, 1.0 / 4096);
  const auto profile = build_barrier(model, 1.0, 0.25, default_gauge_S(1.0), 2.0);

  // analytic path: the exact ODE identities inside B_a
  double worst_analytic = 0.0;
  for (int i = 1; i < 2000; ++i) {
    const double x = 0.25 * i / 2000.0;
    worst_analytic =
        std::max(worst_analytic, std::abs(profile.radial_laplacian(x, 2) - 2.0) / 2.0);
  }
  out.check(worst_analytic <= 1e-6, fmt("analytic rel %.2e > 1e-6", worst_analytic));

  // discrete path: 5-point Laplace-Beltrami of g(rho) at nodes whose whole
  // stencil stays inside B_a (the region where the identity Delta = 2 holds)
  const auto patch = flat_disk(1.0);
  const double dx = 1.0 / 128;
  auto g_of = [&](double u, double v) { return profile.g_at(std::hypot(u, v)); };
  double worst_discrete = 0.0;
  std::size_t inside_nodes = 0;
  for (int j = -127; j <= 127; ++j)
    for (int i = -127; i <= 127; ++i) {
      const double u = i * dx, v = j * dx;
      if (std::hypot(u, v) > 0.25 - dx * (1.0 + 1e-9)) continue;
      const double lap = (g_of(u - dx, v) + g_of(u + dx, v) + g_of(u, v - dx) +
                          g_of(u, v + dx) - 4.0 * g_of(u, v)) /
                         (dx * dx);
      worst_discrete = std::max(worst_discrete, std::abs(lap - 2.0) / 2.0);
      ++inside_nodes;
    }
  out.check(inside_nodes >= 1000, fmt("only %zu full-stencil nodes", inside_nodes));
  out.check(worst_discrete <= 1e-2, fmt("discrete rel %.2e > 1e-2", worst_discrete));

  // outside B_a: pointwise slack against theta h'(rho) S((h(rho)-h(a))/h(a))
  const auto rep = verify_subharmonic(patch, Eigen::Vector3d::Zero(), profile, dx);
  out.check(rep.outside.min_slack >= -1e-2,
            fmt("outside slack %.2e < -1e-2", rep.outside.min_slack));
  out.note(fmt("analytic %.1e, discrete %.1e (%zu nodes), outside slack %+.3f",
               worst_analytic, worst_discrete, inside_nodes, rep.outside.min_slack));
}

void c5_sup_bound_scaling(Outcome& out) {
  const auto model = solve_h(CurvatureBound::constant(0.0, 1.0), 1.0, 1.0 / 8192);
  for (const double theta : {1.0, 2.0}) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const double a : {0.2, 0.1, 0.05, 0.025}) {
      const auto p = build_barrier(model, theta, a, default_gauge_S(theta), 1.0);
      const double gauge = theta == 1.0 ? a * a * std::abs(std::log(a)) : a * a;
      const double ratio = p.sup_bound / gauge;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    out.check(hi / lo < 2.0, fmt("theta=%g spread %.3f >= 2", theta, hi / lo));
    out.note(fmt("theta=%g spread %.3f", theta, hi / lo));
  }
}

void c6_hausdorff_verdicts(Outcome& out) {
  const std::size_t count = 100000;
  {
    const auto cloud = sample_unit_segment(count, 7);
    std::vector<double> deltas;
    for (int k = 4; k <= 10; ++k) deltas.push_back(std::pow(2.0, -k));
    const auto rep = measure_limit(cloud, CoverGauge::square_log(0.25), deltas);
    out.check(rep.density_ok, "segment: density gate failed");
    out.check(rep.sums.back() <= 0.02,
              fmt("segment sum %.4f > 0.02 at 2^-10", rep.sums.back()));
    bool decreasing = true;
    for (std::size_t i = 1; i < rep.sums.size(); ++i)
      decreasing = decreasing && rep.sums[i] < rep.sums[i - 1];
    out.check(decreasing, "segment sums not decreasing across 2^-4..2^-10");
    out.note(fmt("segment final %.2e (%s)", rep.sums.back(), to_string(rep.verdict)));
  }
  {
    const auto cloud = sample_unit_square(count, 7);
    std::vector<double> deltas;
    for (int k = 2; k <= 6; ++k) deltas.push_back(std::pow(2.0, -k));
    MeasureOptions opt;
    opt.reference_volume = 1.0;  // unit square: the packing oracle's 4/pi floor
    const auto rep = measure_limit(cloud, CoverGauge::square(), deltas, opt);
    out.check(rep.density_ok, "square: density gate failed");
    const double floor = 4.0 / std::acos(-1.0);
    for (std::size_t i = 0; i < rep.sums.size(); ++i) {
      out.check(rep.sums[i] >= floor && rep.sums[i] <= 2.5,
                fmt("square sum %.4f at 2^-%zu outside [4/pi, 2.5]", rep.sums[i], i + 2));
      out.check(rep.packing_bound[i] >= floor - 1e-12,
                fmt("packing bound %.4f below 4/pi", rep.packing_bound[i]));
    }
    out.note(fmt("square sums [%.3f, %.3f] (%s)",
                 *std::min_element(rep.sums.begin(), rep.sums.end()),
                 *std::max_element(rep.sums.begin(), rep.sums.end()),
                 to_string(rep.verdict)));
  }
}

void c7_ball_property(Outcome& out) {
  const auto dis = discretize(flat_disk(2.5), 1.0 / 32);
  const auto rep = ball_property_check(dis, {{0.0, 0.0}}, 1.0, 0.5);
  out.check(std::abs(rep.C - 4.0) <= 0.4, fmt("flat C %.4f outside 4 +- 10%%", rep.C));
  const double i_probe = rep.i_lambda(0, 1.1 * rep.bound);
  out.check(i_probe < 0.0, fmt("I_lambda %.3f >= 0 at 1.1*bound", i_probe));

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const auto params = LabyrinthParams::from_index(n);
    const auto patch = labyrinth_patch(params);
    const double R = 0.35 * labyrinth_intrinsic_width(params);
    const auto d2 = discretize(patch, params.r_n / 64.0);
    const auto r2 =
        ball_property_check(d2, {{params.r_n / 2.0, params.aspect * params.r_n / 2.0}}, R, 0.5);
    lo = std::min(lo, r2.C);
    hi = std::max(hi, r2.C);
  }
  out.check(hi / lo <= 1.5, fmt("annuli C spread %.3f > 1.5", hi / lo));
  out.note(fmt("flat C %.3f, I(1.1b) %.2f, annuli spread %.3f", rep.C, i_probe, hi / lo));
}

void c8a_hyperbolic_sweep(Outcome& out) {
  const double eps = 1e-2;
  std::vector<RegionPredicate> exhaustion;
  for (int l = 1; l <= 6; ++l) {
    const double rho = 1.0 - eps - std::pow(2.0, -l);
    exhaustion.push_back([rho](double u, double v) { return u * u + v * v <= rho * rho; });
  }
  EigenOptions opt;
  opt.tol = 1e-8;
  const auto rep = persson_sweep(hyperbolic_disk(eps), 1.0 / 512, exhaustion, opt);
  const double sup = rep.running_sup.back();
  out.check(sup >= 0.20 && sup <= 0.35, fmt("running sup %.4f outside [0.20, 0.35]", sup));
  out.note(fmt("lambda* %.3f..%.3f across l=1..6", rep.lambda_star.front(),
               rep.lambda_star.back()));
}

void c8b_flat_sweep(Outcome& out) {
  std::vector<RegionPredicate> exhaustion;
  for (int l = 1; l <= 6; ++l) {
    const double rho = 1.0 - std::pow(2.0, -l);
    exhaustion.push_back([rho](double u, double v) { return u * u + v * v <= rho * rho; });
  }
  EigenOptions opt;
  opt.tol = 1e-8;
  const auto rep = persson_sweep(flat_disk(1.0), 1.0 / 256, exhaustion, opt);
  const double growth = rep.lambda_star.back() / rep.lambda_star.front();
  out.check(growth > 10.0, fmt("growth %.2fx <= 10x by l=6", growth));
  out.note(fmt("lambda* %.1f -> %.1f (%.0fx)", rep.lambda_star.front(),
               rep.lambda_star.back(), growth));
}

void c8c_andrade_sweep(Outcome& out) {
  const auto patch = andrade_surface(AndradeParams{}, 1.0, 40.0);
  const auto dis = discretize(patch, 1.0 / 32);
  const auto ball =
      ball_property_check(dis, {{0.0, -15.0}, {0.0, -5.0}, {0.0, 5.0}, {0.0, 15.0}}, 0.5, 0.5);
  std::vector<RegionPredicate> exhaustion;
  for (int l = 1; l <= 6; ++l) {
    const double half = l;
    exhaustion.push_back([half](double, double v) { return std::abs(v) <= half; });
  }
  EigenOptions opt;
  opt.tol = 1e-8;
  const auto rep = persson_sweep(patch, 1.0 / 32, exhaustion, opt);
  const double worst = *std::max_element(rep.lambda_star.begin(), rep.lambda_star.end());
  out.check(worst <= 2.0 * ball.bound,
            fmt("max lambda* %.3f > 2x ball bound %.3f", worst, 2.0 * ball.bound));
  out.note(fmt("max lambda* %.3f vs ball bound %.3f", worst, ball.bound));
}

void c9_witness_trend(Outcome& out) {
  const auto patch = flat_disk(1.0);
  const double pi = std::acos(-1.0);
  std::vector<double> infs;
  for (int e = 8; e <= 10; ++e) {
    const double r1 = std::pow(2.0, -e);
    WitnessConfig cfg;
    cfg.r1 = r1;
    for (int j = 0; j < 12; ++j) {
      const double phi = 2.0 * pi * j / 12.0;
      cfg.cover.push_back({Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0), r1});
    }
    cfg.F = [](const Eigen::Vector3d& x) { return 0.5 * (x.squaredNorm() - 1.0); };
    cfg.boundary_distance = [](const Eigen::Vector3d& x) { return 1.0 - x.norm(); };
    cfg.convexity_c = 1.0;
    cfg.theta = 1.0;
    cfg.gauge = default_gauge_S(1.0);
    cfg.rho_max = 2.05;
    infs.push_back(barta_witness(patch, r1 / 2.0, cfg).min_ratio);
  }
  for (std::size_t i = 1; i < infs.size(); ++i) {
    const double ratio = infs[i] / infs[i - 1];
    out.check(ratio >= 1.2, fmt("halving %zu ratio %.3f < 1.2", i, ratio));
  }
  out.note(fmt("inf %.3f -> %.3f -> %.3f (ratios %.2f, %.2f)", infs[0], infs[1], infs[2],
               infs[1] / infs[0], infs[2] / infs[1]));
}

void c10_andrade_consistency(Outcome& out) {
  const AndradeParams params;
  const auto patch = andrade_surface(params, 1.0, 5.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick_u(-0.9, 0.9), pick_v(-4.5, 4.5);
  double worst_conf = 0.0, worst_harm = 0.0;
  std::vector<std::pair<double, double>> pts;
  const double s = 1e-2;
  for (int i = 0; i < 20; ++i) {
    const double u = pick_u(rng), v = pick_v(rng);
    pts.emplace_back(u, v);
    worst_conf = std::max(worst_conf, andrade_conformality_residual(params, u, v));
    const Eigen::Vector3d lap = (patch.immersion(u + s, v) + patch.immersion(u - s, v) +
                                 patch.immersion(u, v + s) + patch.immersion(u, v - s) -
                                 4.0 * patch.immersion(u, v)) /
                                (s * s);
    worst_harm = std::max(worst_harm, lap.cwiseAbs().maxCoeff());
  }
  out.check(worst_conf <= 1e-10, fmt("conformality %.2e > 1e-10", worst_conf));
  out.check(worst_harm <= 1e-4, fmt("harmonicity %.2e > 1e-4", worst_harm));

  // v-independence through the immersion: |chi_u|^2 must match the u-only
  // conformal factor at scattered v
  const auto metric = metric_consistency(patch, pts);
  out.check(metric.max_scale_dev <= 1e-6,
            fmt("metric v-dev %.2e > 1e-6", metric.max_scale_dev));

  // curvature by -lambda^-2 Delta log lambda: negative, v-independent
  double worst_vdep = 0.0;
  bool all_negative = true;
  for (double u = -1.0; u <= 1.0 + 1e-12; u += 0.05) {
    const double k0 = andrade_curvature(params, u, 0.0);
    all_negative = all_negative && k0 < 0.0;
    for (const double v : {3.7, -2.3})
      worst_vdep = std::max(worst_vdep, std::abs(andrade_curvature(params, u, v) - k0));
  }
  out.check(all_negative, "curvature not everywhere negative");
  out.check(worst_vdep <= 1e-6, fmt("curvature v-dependence %.2e > 1e-6", worst_vdep));
  out.note(fmt("conf %.1e, harm %.1e, metric %.1e, K<0, v-dep %.1e", worst_conf, worst_harm,
               metric.max_scale_dev, worst_vdep));
}

}  // namespace

int main() {
  Gate gate;
  gate.criterion("1", 1.0, c1_ode_oracle);
  gate.criterion("2", 120.0, c2_disk_tone);
  gate.criterion("3", 60.0, c3_barta_equality);
  gate.criterion("4", 30.0, c4_flat_subharmonic);
  gate.criterion("5", 5.0, c5_sup_bound_scaling);
  gate.criterion("6", 30.0, c6_hausdorff_verdicts);
  gate.criterion("7", 60.0, c7_ball_property);
  // criterion 8 shares a 10-minute total budget across its three parts
  const double t8 = now_s();
  gate.criterion("8a", 600.0, c8a_hyperbolic_sweep);
  gate.criterion("8b", 600.0 - (now_s() - t8), c8b_flat_sweep);
  gate.criterion("8c", 600.0 - (now_s() - t8), c8c_andrade_sweep);
  gate.criterion("9", 300.0, c9_witness_trend);
  gate.criterion("10", 30.0, c10_andrade_consistency);
  std::printf("%d of 12 criteria lines failed\n", gate.failed);
  return gate.failed;
}
