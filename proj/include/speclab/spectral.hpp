#pragma once

// Spectral estimators on discretized patches: fundamental tones, Persson
// sweeps, Barta lower bounds including the main witness w1, lattice geodesics,
// and the ball-property Rayleigh test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "speclab/barrier.hpp"
#include "speclab/common.hpp"
#include "speclab/convexity.hpp"
#include "speclab/discretize.hpp"
#include "speclab/eigensolve.hpp"
#include "speclab/patch.hpp"
#include "speclab/radial.hpp"

namespace speclab {

// Shortest-path distances on the 8-neighbor node graph; edge weight is the
// endpoint-averaged conformal factor times the Euclidean edge length.
// Unreachable nodes keep distance +inf.
inline std::vector<double> geodesic_distance(const GridDiscretization& dis,
                                             std::size_t source) {
  require(source < dis.n(), "geodesic_distance: source out of range");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(dis.n(), inf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  static constexpr int off[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                    {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
  const double diag = std::sqrt(2.0);
  while (!heap.empty()) {
    auto [d, p] = heap.top();
    heap.pop();
    if (d > dist[p]) continue;
    const auto pi = static_cast<std::int64_t>(dis.cell_i[p]);
    const auto pj = static_cast<std::int64_t>(dis.cell_j[p]);
    for (const auto& o : off) {
      const std::int64_t qi = pi + o[0], qj = pj + o[1];
      if (qi < 0 || qj < 0 || qi > static_cast<std::int64_t>(dis.nx) ||
          qj > static_cast<std::int64_t>(dis.ny))
        continue;
      const std::int64_t id = dis.node_at(static_cast<std::size_t>(qi),
                                          static_cast<std::size_t>(qj));
      if (id < 0) continue;
      const auto q = static_cast<std::size_t>(id);
      const double len = (o[0] != 0 && o[1] != 0 ? diag : 1.0) * dis.dx;
      const double step = 0.5 * (dis.lambda_at[p] + dis.lambda_at[q]) * len;
      if (dist[p] + step < dist[q]) {
        dist[q] = dist[p] + step;
        heap.emplace(dist[q], q);
      }
    }
  }
  return dist;
}

// Node nearest to a parameter point, searched over expanding lattice rings.
inline std::size_t nearest_node(const GridDiscretization& dis, double u, double v) {
  const auto clamp_idx = [](double x, std::size_t hi) {
    const auto i = static_cast<std::int64_t>(std::llround(x));
    return std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(hi));
  };
  const std::int64_t ci = clamp_idx((u - dis.u0) / dis.dx, dis.nx);
  const std::int64_t cj = clamp_idx((v - dis.v0) / dis.dx, dis.ny);
  for (std::int64_t ring = 0; ring <= 64; ++ring) {
    std::int64_t best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::int64_t dj = -ring; dj <= ring; ++dj)
      for (std::int64_t di = -ring; di <= ring; ++di) {
        if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
        const std::int64_t i = ci + di, j = cj + dj;
        if (i < 0 || j < 0 || i > static_cast<std::int64_t>(dis.nx) ||
            j > static_cast<std::int64_t>(dis.ny))
          continue;
        const std::int64_t id =
            dis.node_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (id < 0) continue;
        const double du = dis.u0 + static_cast<double>(i) * dis.dx - u;
        const double dv = dis.v0 + static_cast<double>(j) * dis.dx - v;
        if (du * du + dv * dv < best_d2) {
          best_d2 = du * du + dv * dv;
          best = id;
        }
      }
    if (best >= 0) return static_cast<std::size_t>(best);
  }
  throw std::invalid_argument("nearest_node: no node near the requested point");
}

struct ToneReport {
  double value = 0.0;
  std::size_t nodes = 0;
  int iterations = 0;
  double residual = 0.0;
};

// Bottom of the Dirichlet spectrum of M \ K at the given resolution.
inline ToneReport fundamental_tone(const ConformalPatch& patch, double dx,
                                   const RegionPredicate& excluded = nullptr,
                                   EigenOptions opt = {}) {
  GridDiscretization dis = discretize(patch, dx, excluded);
  opt.k = 1;
  EigenResult res = smallest_eigs(dis, opt);
  return {res.values[0], dis.n(), res.iterations, res.residuals[0]};
}

struct PerssonReport {
  std::vector<double> lambda_star;
  std::vector<double> running_sup;
  std::vector<std::size_t> nodes;
};

// lambda*(M \ K_l) along a nested exhaustion, with the running supremum that
// plays the role of the Persson limit. Nestedness is checked on the realized
// lattice; Dirichlet monotonicity is asserted up to solver tolerance.
inline PerssonReport persson_sweep(const ConformalPatch& patch, double dx,
                                   const std::vector<RegionPredicate>& exhaustion,
                                   EigenOptions opt = {}) {
  require(!exhaustion.empty(), "persson_sweep: exhaustion must be non-empty");
  for (const auto& level : exhaustion)
    require(static_cast<bool>(level), "persson_sweep: null exhaustion predicate");

  GridDiscretization base = discretize(patch, dx);
  for (std::size_t l = 0; l + 1 < exhaustion.size(); ++l)
    for (std::size_t id = 0; id < base.n(); ++id) {
      auto [u, v] = base.position(id);
      if (exhaustion[l](u, v) && !exhaustion[l + 1](u, v))
        throw std::invalid_argument("persson_sweep: exhaustion not nested at level " +
                                    std::to_string(l + 1));
    }

  PerssonReport rep;
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < exhaustion.size(); ++l) {
    ToneReport tone = fundamental_tone(patch, dx, exhaustion[l], opt);
    if (!rep.lambda_star.empty()) {
      const double prev = rep.lambda_star.back();
      require_numeric(tone.value >= prev * (1.0 - 1e-9) - 1e-12,
                      "persson_sweep: Dirichlet monotonicity violated");
    }
    sup = std::max(sup, tone.value);
    rep.lambda_star.push_back(tone.value);
    rep.running_sup.push_back(sup);
    rep.nodes.push_back(tone.nodes);
  }
  return rep;
}

struct BartaReport {
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -std::numeric_limits<double>::infinity();
  std::size_t nodes = 0;
  double arg_u = 0.0, arg_v = 0.0;  // parameter coordinates of the minimizer
};

// Barta lower bound with a nodal function: min over region of (A w)_p / (M_p w_p),
// the discrete (-Delta_g w)/w. Positivity of w is required on region nodes and
// their lattice neighbors.
inline BartaReport barta_bound(const GridDiscretization& dis, const Eigen::VectorXd& w,
                               const RegionPredicate& region = nullptr) {
  require(w.size() == static_cast<Eigen::Index>(dis.n()), "barta_bound: w size mismatch");
  const Eigen::VectorXd Aw = dis.stiffness * w;
  BartaReport rep;
  static constexpr int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (std::size_t p = 0; p < dis.n(); ++p) {
    auto [u, v] = dis.position(p);
    if (region && !region(u, v)) continue;
    require(w[static_cast<Eigen::Index>(p)] > 0.0,
            "barta_bound: w not positive on the region");
    for (const auto& o : off) {
      const std::int64_t qi = static_cast<std::int64_t>(dis.cell_i[p]) + o[0];
      const std::int64_t qj = static_cast<std::int64_t>(dis.cell_j[p]) + o[1];
      if (qi < 0 || qj < 0 || qi > static_cast<std::int64_t>(dis.nx) ||
          qj > static_cast<std::int64_t>(dis.ny))
        continue;
      const std::int64_t id = dis.node_at(static_cast<std::size_t>(qi),
                                          static_cast<std::size_t>(qj));
      if (id >= 0)
        require(w[id] > 0.0, "barta_bound: w not positive on the one-node collar");
    }
    const double ratio =
        Aw[static_cast<Eigen::Index>(p)] /
        (dis.mass[static_cast<Eigen::Index>(p)] * w[static_cast<Eigen::Index>(p)]);
    ++rep.nodes;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.arg_u = u;
      rep.arg_v = v;
    }
  }
  require(rep.nodes > 0, "barta_bound: empty region");
  return rep;
}

// Matrix-free Barta scan over an implicit lattice: the 5-point stencil is
// evaluated with true neighbor values of the closure, so no assembly and no
// Dirichlet elimination enter. Throws numerical_error on nonpositive w, since
// here w is typically a computed witness field.
inline BartaReport barta_bound_lattice(const Domain& dom, double dx,
                                       const std::function<bool(double, double)>& interior,
                                       const std::function<double(double, double)>& lambda,
                                       const std::function<double(double, double)>& w,
                                       const RegionPredicate& region = nullptr,
                                       double* w_min = nullptr) {
  require(dx > 0.0, "barta_bound_lattice: dx must be positive");
  const auto nx = static_cast<std::size_t>(std::llround(dom.width() / dx));
  const auto ny = static_cast<std::size_t>(std::llround(dom.height() / dx));
  require(nx >= 4 && ny >= 4, "barta_bound_lattice: domain unresolved at this dx");
  const double hx = dom.width() / static_cast<double>(nx);
  require(std::abs(dom.height() / static_cast<double>(ny) - hx) <= 1e-9 * hx,
          "barta_bound_lattice: domain is not dx-commensurate");

  BartaReport rep;
  double wmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < ny; ++j) {
    const double v = dom.v0 + hx * static_cast<double>(j);
    for (std::size_t i = 1; i < nx; ++i) {
      const double u = dom.u0 + hx * static_cast<double>(i);
      if (!interior(u, v)) continue;
      if (region && !region(u, v)) continue;
      const double c = w(u, v);
      const double s = w(u - hx, v) + w(u + hx, v) + w(u, v - hx) + w(u, v + hx);
      const double lo =
          std::min({c, w(u - hx, v), w(u + hx, v), w(u, v - hx), w(u, v + hx)});
      wmin = std::min(wmin, lo);
      if (!(lo > 0.0))
        throw numerical_error("barta_bound_lattice: w not positive on region/collar");
      const double lam = lambda(u, v);
      const double ratio = (4.0 * c - s) / (lam * lam * hx * hx * c);
      ++rep.nodes;
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (ratio < rep.min_ratio) {
        rep.min_ratio = ratio;
        rep.arg_u = u;
        rep.arg_v = v;
      }
    }
  }
  require(rep.nodes > 0, "barta_bound_lattice: empty region");
  if (w_min) *w_min = wmin;
  return rep;
}

// Patch-level convenience mirroring the estimator's signature.
inline BartaReport barta_bound(const ConformalPatch& patch, double dx,
                               const std::function<double(double, double)>& w,
                               const RegionPredicate& region = nullptr) {
  return barta_bound_lattice(
      patch.domain, dx, [&patch](double u, double v) { return patch.inside(u, v); },
      patch.lambda, w, region);
}

struct BallPropertyReport {
  double R = 0.0, delta = 0.0;
  std::vector<std::size_t> center_nodes;
  std::vector<double> vol_small, vol_big;
  std::vector<double> ratio;          // vol(B_{dR}) / vol(B_R) per center
  std::vector<double> cutoff_energy;  // psi^T A psi
  std::vector<double> cutoff_mass;    // psi^T M psi
  std::vector<double> rayleigh;       // energy / mass; I_lambda < 0 iff lambda > this
  double C = 0.0;                     // worst inverse ratio
  double bound = 0.0;                 // C / (R^2 (1-delta)^2)
  double negativity_threshold = 0.0;  // max rayleigh over centers

  double i_lambda(std::size_t j, double lambda) const {
    return cutoff_energy[j] - lambda * cutoff_mass[j];
  }
};

// Volume-doubling test of the ball property plus the proof's cutoff Rayleigh
// form. Balls are intrinsic (graph geodesic); overlap is rejected.
inline BallPropertyReport ball_property_check(
    const GridDiscretization& dis, const std::vector<std::pair<double, double>>& centers,
    double R, double delta) {
  require(!centers.empty(), "ball_property_check: need at least one center");
  require(R > 0.0, "ball_property_check: R must be positive");
  require(delta > 0.0 && delta < 1.0, "ball_property_check: delta must lie in (0,1)");

  BallPropertyReport rep;
  rep.R = R;
  rep.delta = delta;
  std::vector<std::vector<double>> fields;
  fields.reserve(centers.size());
  for (const auto& [cu, cv] : centers) {
    rep.center_nodes.push_back(nearest_node(dis, cu, cv));
    fields.push_back(geodesic_distance(dis, rep.center_nodes.back()));
  }
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      require(fields[i][rep.center_nodes[j]] >= 2.0 * R,
              "ball_property_check: intrinsic balls overlap");

  const double inv_width = 1.0 / (R * (1.0 - delta));
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto& d = fields[c];
    double small = 0.0, big = 0.0;
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dis.n()));
    for (std::size_t p = 0; p < dis.n(); ++p) {
      if (d[p] > R) continue;
      const double m = dis.mass[static_cast<Eigen::Index>(p)];
      big += m;
      if (d[p] <= delta * R) {
        small += m;
        psi[static_cast<Eigen::Index>(p)] = 1.0;
      } else {
        psi[static_cast<Eigen::Index>(p)] = (R - d[p]) * inv_width;
      }
    }
    require(small > 0.0, "ball_property_check: delta-ball unresolved at this grid");
    rep.vol_small.push_back(small);
    rep.vol_big.push_back(big);
    rep.ratio.push_back(small / big);
    const double energy = psi.dot(dis.stiffness * psi);
    const double mass = psi.dot(dis.mass.cwiseProduct(psi));
    rep.cutoff_energy.push_back(energy);
    rep.cutoff_mass.push_back(mass);
    rep.rayleigh.push_back(energy / mass);
  }
  rep.C = 1.0 / *std::min_element(rep.ratio.begin(), rep.ratio.end());
  rep.bound = rep.C / (R * R * (1.0 - delta) * (1.0 - delta));
  rep.negativity_threshold = *std::max_element(rep.rayleigh.begin(), rep.rayleigh.end());
  return rep;
}

struct AmbientBall {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

struct WitnessConfig {
  double r1 = 0.0;
  std::vector<AmbientBall> cover;                       // radii eps_j <= r1
  std::function<double(const Eigen::Vector3d&)> F;      // convex exhaustion, < 0 in D
  std::function<double(const Eigen::Vector3d&)> boundary_distance;  // dist to dD
  double convexity_c = 0.0;  // m-convexity constant of F
  double theta = 0.0;
  GaugeS gauge;
  double rho_max = 0.0;      // >= sup ambient distance from any center to the patch
  double curvature_B = 0.0;  // ambient sectional bound G = B^2
  double model_step = 0.0;   // 0 picks r1/16
};

struct WitnessReport {
  double r1 = 0.0, b1 = 0.0;
  std::size_t k1 = 0;
  double gauge_sum = 0.0;  // sum Psi_theta(eps_j), precondition value
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -std::numeric_limits<double>::infinity();
  std::size_t region_nodes = 0;
  double order_constant = 0.0;  // min_ratio * sqrt(r1)
  double w1_min = std::numeric_limits<double>::infinity();
  std::vector<double> u_sup;  // per-ball sup ||u_j||
  double arg_u = 0.0, arg_v = 0.0;
  std::function<double(double, double)> w1;
};

// Assembles the theorem's first-step witness w1 = sum_j (2||u_j|| - u_j) - u_inf
// with u_j = g_j(|phi - x_j|), u_inf = b1 * F(phi), and measures the Barta
// ratio over M \ K_{r1}, the union of the cover-ball preimages and the
// b1-collar of the boundary of D.
inline WitnessReport barta_witness(const ConformalPatch& patch, double dx,
                                   const WitnessConfig& cfg) {
  require(patch.has_immersion(), "barta_witness: patch needs an immersion");
  require(cfg.cover.size() >= 2, "barta_witness: k1 >= 2 cover balls required");
  require(cfg.r1 > 0.0 && cfg.r1 < 1.0, "barta_witness: r1 must lie in (0,1)");
  require(cfg.theta > 0.0, "barta_witness: theta must be positive");
  require(cfg.rho_max > 0.0, "barta_witness: rho_max must be positive");
  require(static_cast<bool>(cfg.F) && static_cast<bool>(cfg.boundary_distance),
          "barta_witness: F and boundary_distance are required");
  require(cfg.convexity_c > 0.0, "barta_witness: convexity constant must be positive");

  WitnessReport rep;
  rep.r1 = cfg.r1;
  rep.b1 = 8.0 * std::sqrt(cfg.r1);
  rep.k1 = cfg.cover.size();
  for (const auto& ball : cfg.cover) {
    require(ball.radius > 0.0 && ball.radius <= cfg.r1 * (1.0 + 1e-12),
            "barta_witness: cover radii must lie in (0, r1]");
    rep.gauge_sum += theta_gauge_value(cfg.theta, ball.radius);
  }
  require(rep.gauge_sum <= cfg.r1 * (1.0 + 1e-12),
          "barta_witness: sum Psi(eps_j) exceeds r1");

  // Spot-check the m-convexity of F at sampled surface points (j = 2, the
  // immersed dimension of the catalog).
  {
    std::vector<Eigen::VectorXd> samples;
    const auto& dom = patch.domain;
    for (int a = 1; a <= 4; ++a)
      for (int b = 1; b <= 4; ++b) {
        const double u = dom.u0 + dom.width() * a / 5.0;
        const double v = dom.v0 + dom.height() * b / 5.0;
        if (patch.inside(u, v)) samples.push_back(patch.immersion(u, v));
      }
    require(!samples.empty(), "barta_witness: no interior sample points");
    auto field = [&cfg](const Eigen::VectorXd& x) {
      return cfg.F(Eigen::Vector3d(x[0], x[1], x[2]));
    };
    ConvexityMarginReport conv = check_j_convex(fd_hessian(field), 2, samples);
    require(conv.passes(cfg.convexity_c * (1.0 - 1e-3)),
            "barta_witness: F fails the m-convexity spot check");
  }

  const double step = cfg.model_step > 0.0 ? cfg.model_step : cfg.r1 / 16.0;
  RadialModel model =
      solve_h(CurvatureBound::constant(cfg.curvature_B * cfg.curvature_B,
                                       cfg.rho_max * 1.02),
              cfg.rho_max * 1.02, step);
  require(cfg.r1 <= a_bar_of(model), "barta_witness: r1 exceeds a_bar of the model");

  // One barrier per distinct cover radius (a_j = eps_j, R = rho_max as in the
  // lemma's application).
  auto profiles = std::make_shared<std::vector<BarrierProfile>>();
  std::map<double, std::size_t> by_radius;
  std::vector<std::size_t> profile_of(cfg.cover.size());
  for (std::size_t j = 0; j < cfg.cover.size(); ++j) {
    auto [it, fresh] = by_radius.try_emplace(cfg.cover[j].radius, profiles->size());
    if (fresh)
      profiles->push_back(
          build_barrier(model, cfg.theta, cfg.cover[j].radius, cfg.gauge, cfg.rho_max));
    profile_of[j] = it->second;
  }
  for (std::size_t j = 0; j < cfg.cover.size(); ++j)
    rep.u_sup.push_back((*profiles)[profile_of[j]].sup_bound);

  const double b1 = rep.b1;
  auto immersion = patch.immersion;
  auto F = cfg.F;
  std::vector<Eigen::Vector3d> centers;
  for (const auto& ball : cfg.cover) centers.push_back(ball.center);
  const std::vector<double> u_sup = rep.u_sup;
  const std::vector<std::size_t> prof_idx = profile_of;
  const double rho_cap = cfg.rho_max;
  rep.w1 = [profiles, prof_idx, centers, u_sup, b1, immersion, F, rho_cap](
               double u, double v) {
    const Eigen::Vector3d x = immersion(u, v);
    double acc = -b1 * F(x);
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const double rho = std::min((x - centers[j]).norm(), rho_cap);
      acc += 2.0 * u_sup[j] - (*profiles)[prof_idx[j]].g_at(rho);
    }
    return acc;
  };

  auto boundary_distance = cfg.boundary_distance;
  std::vector<double> radii;
  for (const auto& ball : cfg.cover) radii.push_back(ball.radius);
  RegionPredicate region = [immersion, boundary_distance, centers, radii, b1](
                               double u, double v) {
    const Eigen::Vector3d x = immersion(u, v);
    if (boundary_distance(x) < b1) return true;
    for (std::size_t j = 0; j < centers.size(); ++j)
      if ((x - centers[j]).norm() < radii[j]) return true;
    return false;
  };

  BartaReport scan = barta_bound_lattice(
      patch.domain, dx, [&patch](double u, double v) { return patch.inside(u, v); },
      patch.lambda, rep.w1, region, &rep.w1_min);
  rep.min_ratio = scan.min_ratio;
  rep.max_ratio = scan.max_ratio;
  rep.region_nodes = scan.nodes;
  rep.arg_u = scan.arg_u;
  rep.arg_v = scan.arg_v;
  rep.order_constant = rep.min_ratio * std::sqrt(cfg.r1);
  return rep;
}

}  // namespace speclab
