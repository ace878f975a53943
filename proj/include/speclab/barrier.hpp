#pragma once

// Radial barrier construction: the weight w, the nested-quadrature barrier g,
// its sup-norm certificates, and the discrete subharmonicity verifier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "speclab/common.hpp"
#include "speclab/io.hpp"
#include "speclab/patch.hpp"
#include "speclab/radial.hpp"

namespace speclab {

struct GaugeS {
  std::function<double(double)> S;
  std::string descriptor;
};

inline GaugeS default_gauge_S(double theta) {
  require(theta > 0.0, "default_gauge_S: theta must be positive");
  const double p = theta + 2.0;
  return {[p](double t) { return std::pow(std::max(t, 1.0), -p); },
          "max(t,1)^-(theta+2)"};
}

namespace detail {

// Spot-check the gauge contract: S(0)=1, positive, non-increasing.
inline void check_gauge(const GaugeS& gauge) {
  require(std::abs(gauge.S(0.0) - 1.0) <= 1e-12, "gauge: S(0) must equal 1");
  double prev = gauge.S(0.0);
  for (int i = 1; i <= 64; ++i) {
    const double t = 0.25 * i;
    const double s = gauge.S(t);
    require(std::isfinite(s) && s > 0.0, "gauge: S must be positive and finite");
    require(s <= prev + 1e-12, "gauge: S must be non-increasing");
    prev = s;
  }
}

}  // namespace detail

// s_hat = integral of t^theta S(t) over [0, inf). The window doubles until the
// last octave contributes below tolerance; gauges without an integrable tail
// are rejected.
inline double s_hat(double theta, const GaugeS& gauge) {
  require(theta > 0.0, "s_hat: theta must be positive");
  detail::check_gauge(gauge);
  auto segment = [&](double lo, double hi) {
    const int n = 4096;
    const double step = (hi - lo) / n;
    double acc = 0.0;
    double prev = std::pow(lo, theta) * gauge.S(lo);
    for (int i = 1; i <= n; ++i) {
      const double t = lo + step * i;
      const double cur = std::pow(t, theta) * gauge.S(t);
      acc += 0.5 * step * (prev + cur);
      prev = cur;
    }
    return acc;
  };
  double total = segment(0.0, 1.0);
  double lo = 1.0;
  for (int octave = 0; octave < 48; ++octave) {
    const double part = segment(lo, 2.0 * lo);
    total += part;
    lo *= 2.0;
    if (part <= 1e-13 * std::max(total, 1.0)) return total;
  }
  throw numerical_error("s_hat: integral of t^theta S(t) does not converge");
}

struct SeriesValue {
  double value = 0.0;
  double remainder = 0.0;
  std::size_t terms = 0;
};

// S* = (theta+1) sum_{k>=1} S(k)(k+1)^theta, partial sum plus an integral-style
// tail bound. The tail estimate k*f(k) is exact for the quadratic decay of the
// default gauge family; the factor-2 bracket absorbs slower prefactors.
inline SeriesValue s_star(double theta, const GaugeS& gauge, std::size_t k_max = 0) {
  require(theta > 0.0, "s_star: theta must be positive");
  auto term = [&](std::size_t k) {
    return (theta + 1.0) * gauge.S(static_cast<double>(k)) *
           std::pow(static_cast<double>(k + 1), theta);
  };
  std::size_t limit = k_max;
  if (limit == 0) {
    limit = 1024;
    while (limit < (std::size_t{1} << 26) && term(limit) >= 1e-12) limit *= 2;
  }
  const double last = term(limit);
  if (!(last < 1e-12))
    throw numerical_error("s_star: tail term above 1e-12 at k_max; series not summable "
                          "within budget");
  SeriesValue out;
  for (std::size_t k = 1; k <= limit; ++k) out.value += term(k);
  out.remainder = static_cast<double>(limit) * last;
  out.value += out.remainder;  // midpoint of [partial, partial + 2*k*f(k)]
  out.terms = limit;
  return out;
}

// Largest grid time with h' >= 1/2 on the whole initial interval, capped at 1.
inline double a_bar_of(const RadialModel& model) {
  double a_bar = 0.0;
  for (std::size_t i = 0; i < model.t.size(); ++i) {
    if (model.dh[i] < 0.5) break;
    a_bar = model.t[i];
    if (a_bar >= 1.0) return 1.0;
  }
  return a_bar;
}

// The three-regime gauge of the sup bound: t^2 above theta=1, t^2|log t| at
// theta=1, t^(theta+1) below.
inline double theta_gauge_value(double theta, double t) {
  require(theta > 0.0, "theta_gauge_value: theta must be positive");
  require(t > 0.0, "theta_gauge_value: t must be positive");
  if (theta > 1.0 + 1e-9) return t * t;
  if (theta >= 1.0 - 1e-9) return t * t * std::abs(std::log(t));
  return std::pow(t, theta + 1.0);
}

struct BarrierProfile {
  double theta = 0.0;
  double a = 0.0;
  double a_bar = 0.0;
  double R = 0.0;
  double h_a = 0.0;
  RadialModel model;
  GaugeS gauge;
  std::vector<double> t;   // [0, R], model spacing, final partial panel to R
  std::vector<double> w;   // weight samples
  std::vector<double> g;   // barrier samples
  std::vector<double> dg;  // g' = h^-theta * int h^theta w, exact h(t) for t <= a
  double sup_bound = 0.0;  // g(R)
  double s_hat_value = 0.0;
  double s_star_value = 0.0;

  double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }

 private:
  double interp(const std::vector<double>& y, double x) const {
    require(x >= 0.0 && x <= t.back() + 1e-12, "barrier: query outside [0, R]");
    x = std::min(x, t.back());
    const double s = step();
    const std::size_t last = t.size() - 1;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x / s), last - 1);
    if (x > t[last - 1]) i = last - 1;  // final panel may be shorter
    const double width = t[i + 1] - t[i];
    const double f = width > 0.0 ? (x - t[i]) / width : 0.0;
    return y[i] + f * (y[i + 1] - y[i]);
  }

 public:
  double w_at(double x) const { return interp(w, x); }
  double g_at(double x) const { return interp(g, x); }
  double dg_at(double x) const { return interp(dg, x); }

  // Laplacian of g(rho) under the m-dimensional radial model, using the exact
  // identities g'' = w - theta (h'/h) g' and g' = dg.
  double radial_laplacian(double x, int m) const {
    const double coeff = static_cast<double>(m) - 1.0 - theta;
    if (x < t[1]) return w_at(0.0) + coeff;  // h'g'/h -> 1 at the origin
    return w_at(x) + coeff * (model.dh_at(x) / model.h_at(x)) * dg_at(x);
  }
};

inline BarrierProfile build_barrier(const RadialModel& model, double theta, double a,
                                    const GaugeS& gauge, double R) {
  require(theta > 0.0, "build_barrier: theta must be positive");
  require(a > 0.0, "build_barrier: a must be positive");
  require(R > 0.0 && R <= model.t_max() + 1e-12, "build_barrier: R exceeds model range");
  detail::check_gauge(gauge);
  const double a_bar = a_bar_of(model);
  require(a <= a_bar + 1e-12, "build_barrier: a exceeds a_bar");

  BarrierProfile p;
  p.theta = theta;
  p.a = a;
  p.a_bar = a_bar;
  p.R = std::min(R, model.t_max());
  p.model = model;
  p.gauge = gauge;
  p.h_a = model.h_at(a);

  const double s = model.t[1] - model.t[0];
  const std::size_t full = static_cast<std::size_t>(std::floor(p.R / s + 1e-9));
  p.t.reserve(full + 2);
  for (std::size_t i = 0; i <= full; ++i) p.t.push_back(model.t[i]);
  if (p.R - p.t.back() > 1e-9 * s) p.t.push_back(p.R);

  const std::size_t n = p.t.size();
  std::vector<double> h(n), dh(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = model.h_at(p.t[i]);
    dh[i] = model.dh_at(p.t[i]);
  }
  p.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double base = (theta + 1.0) * dh[i];
    p.w[i] = p.t[i] <= a ? base : base * gauge.S((h[i] - p.h_a) / p.h_a);
  }

  // g' on the grid. For t <= a the closed form g' = h is exact; past a, the
  // running integral of h^theta w is anchored at the analytic value h(a)^(theta+1)
  // so the two branches join without quadrature drift.
  p.dg.resize(n);
  std::size_t ia = 0;
  while (ia + 1 < n && p.t[ia + 1] <= a) ++ia;
  for (std::size_t i = 0; i <= ia; ++i) p.dg[i] = h[i];
  if (ia + 1 < n) {
    auto integrand = [&](double x) {
      const double hx = model.h_at(x);
      const double wx = (theta + 1.0) * model.dh_at(x) *
                        (x <= a ? 1.0 : gauge.S((hx - p.h_a) / p.h_a));
      return std::pow(hx, theta) * wx;
    };
    double acc = std::pow(p.h_a, theta + 1.0);
    acc += 0.5 * (p.t[ia + 1] - a) * (integrand(a) + integrand(p.t[ia + 1]));
    p.dg[ia + 1] = acc / std::pow(h[ia + 1], theta);
    for (std::size_t i = ia + 2; i < n; ++i) {
      acc += 0.5 * (p.t[i] - p.t[i - 1]) * (integrand(p.t[i - 1]) + integrand(p.t[i]));
      p.dg[i] = acc / std::pow(h[i], theta);
    }
  }

  p.g.resize(n);
  p.g[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    p.g[i] = p.g[i - 1] + 0.5 * (p.t[i] - p.t[i - 1]) * (p.dg[i - 1] + p.dg[i]);
  p.sup_bound = p.g.back();

  p.s_hat_value = s_hat(theta, gauge);
  p.s_star_value = s_star(theta, gauge).value;
  return p;
}

struct SupBoundCertificate {
  std::string regime;
  double gauge_value = 0.0;
  double ratio = 0.0;        // sup_bound / gauge_value
  double superg_rhs = 0.0;   // explicit upper bound: int_0^a h + (1+S*) h(a)^(t+1) int_a^R h^-theta
};

inline SupBoundCertificate sup_bound_certificate(const BarrierProfile& p) {
  SupBoundCertificate cert;
  if (p.theta > 1.0 + 1e-9)
    cert.regime = "a^2";
  else if (p.theta >= 1.0 - 1e-9)
    cert.regime = "a^2|log a|";
  else
    cert.regime = "a^(theta+1)";
  cert.gauge_value = theta_gauge_value(p.theta, p.a);
  cert.ratio = p.sup_bound / cert.gauge_value;

  const std::size_t n = 512;
  double f_a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = p.a * i / n, x1 = p.a * (i + 1) / n;
    f_a += 0.5 * (x1 - x0) * (p.model.h_at(x0) + p.model.h_at(x1));
  }
  double tail = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = p.a + (p.R - p.a) * i / n, x1 = p.a + (p.R - p.a) * (i + 1) / n;
    tail += 0.5 * (x1 - x0) *
            (std::pow(p.model.h_at(x0), -p.theta) + std::pow(p.model.h_at(x1), -p.theta));
  }
  cert.superg_rhs =
      f_a + (1.0 + p.s_star_value) * std::pow(p.h_a, p.theta + 1.0) * tail;
  return cert;
}

struct SubharmonicSide {
  double min_slack = std::numeric_limits<double>::infinity();
  double min_lap = std::numeric_limits<double>::infinity();
  double max_lap = -std::numeric_limits<double>::infinity();
  double arg_u = 0.0, arg_v = 0.0;
  std::size_t nodes = 0;
};

struct SubharmonicReport {
  double a = 0.0;
  double band = 0.0;  // representative half-cell band width (ambient units)
  std::size_t ball_nodes = 0;
  SubharmonicSide inside;   // slack against (theta+1)/2
  SubharmonicSide outside;  // slack against theta h'(rho) S((h(rho)-h(a))/h(a))
  double min_slack() const { return std::min(inside.min_slack, outside.min_slack); }
};

// Evaluates u = g(rho . phi) on the lattice and compares the discrete
// Laplace-Beltrami values against the lemma's two lower bounds. Nodes within a
// half-cell of the B_a sphere are left unclassified; nodes whose stencil
// reaches past rho = R are skipped.
inline SubharmonicReport verify_subharmonic(const ConformalPatch& patch,
                                            const Eigen::Vector3d& x0,
                                            const BarrierProfile& profile, double dx) {
  require(patch.has_immersion(), "verify_subharmonic: patch needs an immersion");
  require(dx > 0.0, "verify_subharmonic: dx must be positive");
  const auto& dom = patch.domain;
  const std::size_t nx = static_cast<std::size_t>(std::llround(dom.width() / dx));
  const std::size_t ny = static_cast<std::size_t>(std::llround(dom.height() / dx));
  require(nx >= 4 && ny >= 4, "verify_subharmonic: domain unresolved at this dx");
  const double hx = dom.width() / static_cast<double>(nx);
  const double hy = dom.height() / static_cast<double>(ny);
  require(std::abs(hx - hy) <= 1e-9 * hx, "verify_subharmonic: domain is not dx-commensurate");

  auto rho = [&](double u, double v) { return (patch.immersion(u, v) - x0).norm(); };
  auto value = [&](double u, double v) { return profile.g_at(rho(u, v)); };

  SubharmonicReport rep;
  rep.a = profile.a;

  const double rho_cap = profile.R * (1.0 - 1e-12);
  double band_sum = 0.0;
  std::size_t band_count = 0;
  for (std::size_t j = 1; j < ny; ++j) {
    const double v = dom.v0 + hx * static_cast<double>(j);
    for (std::size_t i = 1; i < nx; ++i) {
      const double u = dom.u0 + hx * static_cast<double>(i);
      if (!patch.inside(u, v)) continue;
      const double rc = rho(u, v);
      if (rc < profile.a) ++rep.ball_nodes;
      if (rc > rho_cap) continue;
      if (rho(u - hx, v) > rho_cap || rho(u + hx, v) > rho_cap ||
          rho(u, v - hx) > rho_cap || rho(u, v + hx) > rho_cap)
        continue;
      const double lam = patch.lambda(u, v);
      const double lap = (value(u - hx, v) + value(u + hx, v) + value(u, v - hx) +
                          value(u, v + hx) - 4.0 * value(u, v)) /
                         (lam * lam * hx * hx);
      const double band = 0.5 * lam * hx;
      band_sum += band;
      ++band_count;
      SubharmonicSide* side = nullptr;
      double bound = 0.0;
      if (rc <= profile.a - band) {
        side = &rep.inside;
        bound = 0.5 * (profile.theta + 1.0);
      } else if (rc >= profile.a + band) {
        side = &rep.outside;
        bound = profile.theta * profile.model.dh_at(rc) *
                profile.gauge.S((profile.model.h_at(rc) - profile.h_a) / profile.h_a);
      } else {
        continue;
      }
      const double slack = lap - bound;
      ++side->nodes;
      side->min_lap = std::min(side->min_lap, lap);
      side->max_lap = std::max(side->max_lap, lap);
      if (slack < side->min_slack) {
        side->min_slack = slack;
        side->arg_u = u;
        side->arg_v = v;
      }
    }
  }
  rep.band = band_count ? band_sum / static_cast<double>(band_count) : 0.0;
  // 8 nodes across B_a <=> ball radius of at least 4 cells <=> pi*16 ball nodes.
  require(rep.ball_nodes >= 50, "verify_subharmonic: grid too coarse across B_a");
  return rep;
}

inline void write_barrier_csv(const BarrierProfile& p, const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  rows.reserve(p.t.size());
  for (std::size_t i = 0; i < p.t.size(); ++i) rows.push_back({p.t[i], p.w[i], p.g[i]});
  write_csv(path, {"t", "w", "g"}, rows);
}

}  // namespace speclab
