#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "speclab/common.hpp"
#include "speclab/io.hpp"

namespace speclab {

/** Radial curvature upper bound: either a constant value (B² when nonnegative)
 *  or a tabulated continuous function on [0, t_max]. */
struct CurvatureBound {
  std::function<double(double)> eval;
  double t_max = 0;
  bool is_constant = false;
  double constant_value = 0;
  std::string descriptor;

  static CurvatureBound constant(double value, double t_max) {
    require(std::isfinite(value), "curvature constant must be finite");
    require(t_max > 0, "t_max must be positive");
    CurvatureBound b;
    b.eval = [value](double) { return value; };
    b.t_max = t_max;
    b.is_constant = true;
    b.constant_value = value;
    b.descriptor = "const:" + format_double(value);
    return b;
  }

  static CurvatureBound tabulated(std::vector<double> times, std::vector<double> values) {
    require(times.size() == values.size() && times.size() >= 2, "need >= 2 table rows");
    require(times.front() == 0.0, "table must start at t = 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
      require(std::isfinite(values[i]), "non-finite G sample");
      if (i) require(times[i] > times[i - 1], "table times must increase");
    }
    CurvatureBound b;
    b.t_max = times.back();
    b.descriptor = "tabulated[" + std::to_string(times.size()) + "]";
    b.eval = [ts = std::move(times), vs = std::move(values)](double t) {
      if (t <= ts.front()) return vs.front();
      if (t >= ts.back()) return vs.back();
      auto it = std::upper_bound(ts.begin(), ts.end(), t);
      std::size_t i = static_cast<std::size_t>(it - ts.begin());
      double s = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
      return vs[i - 1] + s * (vs[i] - vs[i - 1]);
    };
    return b;
  }
};

/** Sampled solution of h'' = G h, h(0)=0, h'(0)=1, with positivity bookkeeping. */
struct RadialModel {
  CurvatureBound bound;
  std::vector<double> t;   // uniform grid, t.front()=0, t.back()=t_max
  std::vector<double> h;
  std::vector<double> dh;
  double B = std::numeric_limits<double>::quiet_NaN();  // sqrt(G) for constant G >= 0
  bool h2_ok = true;  // h > 0 and h' > 0 on (0, t_max]
  double first_failure_time = std::numeric_limits<double>::infinity();

  double t_max() const { return t.back(); }

  double h_at(double s) const { return interp(h, s); }
  double dh_at(double s) const { return interp(dh, s); }

 private:
  double interp(const std::vector<double>& y, double s) const {
    require(s >= 0 && s <= t.back() * (1 + 1e-12), "time outside model range");
    s = std::min(s, t.back());
    double dt = t[1] - t[0];
    std::size_t i = std::min(static_cast<std::size_t>(s / dt), t.size() - 2);
    double w = (s - t[i]) / dt;
    return y[i] + w * (y[i + 1] - y[i]);
  }
};

/** Classical fixed-step RK4 for the Jacobi-type initial value problem. */
inline RadialModel solve_h(const CurvatureBound& bound, double t_max, double step) {
  require(step > 0, "step must be positive");
  require(t_max > 0, "t_max must be positive");
  require(t_max <= bound.t_max * (1 + 1e-12), "t_max exceeds curvature bound range");
  auto n = static_cast<std::size_t>(std::ceil(t_max / step - 1e-9));
  n = std::max<std::size_t>(n, 1);
  double dt = t_max / static_cast<double>(n);

  RadialModel model;
  model.bound = bound;
  if (bound.is_constant && bound.constant_value >= 0) model.B = std::sqrt(bound.constant_value);
  model.t.resize(n + 1);
  model.h.resize(n + 1);
  model.dh.resize(n + 1);
  model.t[0] = 0;
  model.h[0] = 0;
  model.dh[0] = 1;

  auto G = [&](double s) {
    double v = bound.eval(s);
    require(std::isfinite(v), "non-finite G sample");
    return v;
  };

  double y0 = 0, y1 = 1;  // (h, h')
  for (std::size_t k = 0; k < n; ++k) {
    double tk = static_cast<double>(k) * dt;
    double g0 = G(tk), gm = G(tk + dt / 2), g1 = G(tk + dt);
    double a0 = y1, b0 = g0 * y0;
    double a1 = y1 + dt / 2 * b0, b1 = gm * (y0 + dt / 2 * a0);
    double a2 = y1 + dt / 2 * b1, b2 = gm * (y0 + dt / 2 * a1);
    double a3 = y1 + dt * b2, b3 = g1 * (y0 + dt * a2);
    y0 += dt / 6 * (a0 + 2 * a1 + 2 * a2 + a3);
    y1 += dt / 6 * (b0 + 2 * b1 + 2 * b2 + b3);
    require_numeric(std::isfinite(y0) && std::isfinite(y1), "ODE solution blew up");
    double tk1 = static_cast<double>(k + 1) * dt;
    model.t[k + 1] = tk1;
    model.h[k + 1] = y0;
    model.dh[k + 1] = y1;
    if (model.h2_ok && (y0 <= 0 || y1 <= 0)) {
      model.h2_ok = false;
      model.first_failure_time = tk1;
    }
  }
  model.t.back() = t_max;  // kill accumulated rounding in the last node
  return model;
}

/** mu(t) = max over [0, t] of h/h'; the sup the theta formula consumes. */
inline double mu(const RadialModel& model, double t) {
  require(t >= 0 && t <= model.t_max() * (1 + 1e-12), "t outside model range");
  t = std::min(t, model.t_max());
  double best = 0;
  for (std::size_t i = 0; i < model.t.size() && model.t[i] <= t; ++i) {
    require_numeric(i == 0 || model.dh[i] > 0, "mu undefined: h' vanishes on [0,t]");
    if (i > 0) best = std::max(best, model.h[i] / model.dh[i]);
  }
  double dh_t = model.dh_at(t);
  require_numeric(dh_t > 0, "mu undefined: h' vanishes on [0,t]");
  if (t > 0) best = std::max(best, model.h_at(t) / dh_t);
  return best;
}

struct ThetaReport {
  double value;
  bool admissible;  // the mean-curvature hypothesis requires value > 0
};

inline ThetaReport theta(int m, double H_norm, double R, const RadialModel& model) {
  require(m >= 2, "dimension m must be >= 2");
  require(H_norm >= 0, "H_norm must be nonnegative");
  double v = static_cast<double>(m) - 1.0 - static_cast<double>(m) * H_norm * mu(model, R);
  return {v, v > 0};
}

/** Primitive f = int_0^t h and the uniform convexity constant c = inf h' on [0,R]. */
struct ConvexityData {
  std::vector<double> t;
  std::vector<double> f;
  double c = 0;
  double R = 0;
};

inline ConvexityData convexity_data(const RadialModel& model, double R) {
  require(R > 0 && R <= model.t_max() * (1 + 1e-12), "R outside model range");
  R = std::min(R, model.t_max());
  ConvexityData data;
  data.R = R;
  data.c = std::numeric_limits<double>::infinity();
  data.t.push_back(0);
  data.f.push_back(0);
  double acc = 0;
  for (std::size_t i = 1; i < model.t.size() && model.t[i] <= R + 1e-15; ++i) {
    acc += (model.t[i] - model.t[i - 1]) * (model.h[i] + model.h[i - 1]) / 2;
    data.t.push_back(model.t[i]);
    data.f.push_back(acc);
  }
  if (data.t.back() < R - 1e-12 * std::max(1.0, R)) {
    double hR = model.h_at(R);
    acc += (R - data.t.back()) * (model.h_at(data.t.back()) + hR) / 2;
    data.t.push_back(R);
    data.f.push_back(acc);
  }
  for (std::size_t i = 0; i < model.t.size() && model.t[i] <= R + 1e-15; ++i)
    data.c = std::min(data.c, model.dh[i]);
  data.c = std::min(data.c, model.dh_at(R));
  require_numeric(data.c > 0, "convexity data undefined: h' not positive on [0,R]");
  return data;
}

/** Remark-3.3 style decay condition on the negative part of G: G_-(s) <= 1/(4 s^2). */
struct DecayCheck {
  bool ok;
  double worst_ratio;  // max over samples of 4 s^2 G_-(s)
  double arg_worst;
};

inline DecayCheck check_curvature_decay(const CurvatureBound& bound,
                                        std::size_t n_samples = 2048) {
  require(n_samples >= 2, "need at least 2 samples");
  DecayCheck check{true, 0, 0};
  for (std::size_t i = 1; i <= n_samples; ++i) {
    double s = bound.t_max * static_cast<double>(i) / static_cast<double>(n_samples);
    double neg = std::max(-bound.eval(s), 0.0);
    double ratio = 4 * s * s * neg;
    if (ratio > check.worst_ratio) {
      check.worst_ratio = ratio;
      check.arg_worst = s;
    }
  }
  check.ok = check.worst_ratio <= 1 + 1e-12;
  return check;
}

enum class TailVerdict { convergent, divergent, inconclusive };

inline const char* to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::convergent: return "convergent";
    case TailVerdict::divergent: return "divergent";
    default: return "inconclusive";
  }
}

/** Outcome of the non-parabolicity test: does int_1^inf h^{1-m} converge? */
struct NonparabolicityReport {
  TailVerdict verdict = TailVerdict::inconclusive;
  double integral = 0;       // computed piece over [1, t_max]
  double tail_estimate = 0;  // extrapolated remainder (inf when divergent)
  double fit_exponent = 0;   // power-law slope or exponential rate
  double fit_residual = 0;   // rms misfit in log space
  std::string fit_kind;
};

namespace detail {

struct LineFit {
  double slope, intercept, rms;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  require_numeric(std::abs(denom) > 1e-300, "degenerate line fit");
  LineFit fit{};
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

}  // namespace detail

inline NonparabolicityReport nonparabolicity_check(const RadialModel& model, int m) {
  require(m >= 2, "dimension m must be >= 2");
  require(model.h2_ok, "nonparabolicity check needs an (H2)-mode model");
  require(model.t_max() > 1, "model must extend beyond t = 1");
  NonparabolicityReport report;
  double p = 1.0 - static_cast<double>(m);

  auto integrand = [&](std::size_t i) { return std::pow(model.h[i], p); };
  double acc = 0;
  bool started = false;
  double prev_t = 1.0, prev_y = std::pow(model.h_at(1.0), p);
  for (std::size_t i = 0; i < model.t.size(); ++i) {
    if (model.t[i] < 1.0) continue;
    double y = integrand(i);
    if (started) acc += (model.t[i] - prev_t) * (y + prev_y) / 2;
    else if (model.t[i] > 1.0) acc += (model.t[i] - 1.0) * (prev_y + y) / 2;
    prev_t = model.t[i];
    prev_y = y;
    started = true;
  }
  report.integral = acc;

  if (model.t_max() < 100.0) {  // need two decades beyond t=1 for a stable tail fit
    report.verdict = TailVerdict::inconclusive;
    report.tail_estimate = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  std::vector<double> ts, logt, logy;
  double window_start = model.t_max() / 2;
  for (std::size_t i = 0; i < model.t.size(); ++i) {
    if (model.t[i] < window_start) continue;
    double y = integrand(i);
    if (!(y > 0) || !std::isfinite(std::log(y))) continue;
    ts.push_back(model.t[i]);
    logt.push_back(std::log(model.t[i]));
    logy.push_back(std::log(y));
  }
  require_numeric(ts.size() >= 8, "too few samples in tail-fit window");

  auto power = detail::fit_line(logt, logy);
  auto expo = detail::fit_line(ts, logy);
  bool use_expo = expo.rms < power.rms;
  const auto& fit = use_expo ? expo : power;
  report.fit_kind = use_expo ? "exponential" : "power";
  report.fit_exponent = fit.slope;
  report.fit_residual = fit.rms;

  if (fit.rms > 1e-2) {
    report.verdict = TailVerdict::inconclusive;
    report.tail_estimate = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  double y_end = std::pow(model.h.back(), p);
  if (use_expo) {
    if (fit.slope < 0) {
      report.verdict = TailVerdict::convergent;
      report.tail_estimate = y_end / (-fit.slope);
    } else {
      report.verdict = TailVerdict::divergent;
      report.tail_estimate = std::numeric_limits<double>::infinity();
    }
  } else {
    // true threshold is slope = -1; the 0.05 margin keeps borderline fits honest
    if (fit.slope < -1.05) {
      report.verdict = TailVerdict::convergent;
      report.tail_estimate = y_end * model.t_max() / (-fit.slope - 1);
    } else {
      report.verdict = TailVerdict::divergent;
      report.tail_estimate = std::numeric_limits<double>::infinity();
    }
  }
  return report;
}

/** Volume of the radius-R metric ball in the m-dimensional model space. */
inline double model_ball_volume(const RadialModel& model, int m, double R) {
  require(m >= 2, "dimension m must be >= 2");
  require(R > 0 && R <= model.t_max() * (1 + 1e-12), "R outside model range");
  R = std::min(R, model.t_max());
  double sphere_area = 2 * std::pow(std::acos(-1.0), m / 2.0) / std::tgamma(m / 2.0);
  double acc = 0;
  double prev_t = 0, prev_y = 0;
  for (std::size_t i = 1; i < model.t.size() && model.t[i] <= R + 1e-15; ++i) {
    double y = std::pow(std::max(model.h[i], 0.0), m - 1);
    acc += (model.t[i] - prev_t) * (y + prev_y) / 2;
    prev_t = model.t[i];
    prev_y = y;
  }
  if (prev_t < R - 1e-12 * std::max(1.0, R)) {
    double y = std::pow(std::max(model.h_at(R), 0.0), m - 1);
    acc += (R - prev_t) * (y + prev_y) / 2;
  }
  return sphere_area * acc;
}

/** Bishop-Gromov style ratio vol(B_r)/vol(B_R) in the model space, r <= R. */
inline double bishop_gromov_ratio(const RadialModel& model, int m, double r, double R) {
  require(r > 0 && r <= R, "need 0 < r <= R");
  return model_ball_volume(model, m, r) / model_ball_volume(model, m, R);
}

inline void write_model_csv(const RadialModel& model, const std::filesystem::path& dir,
                            const std::string& stem) {
  std::vector<std::vector<double>> rows_h, rows_dh;
  rows_h.reserve(model.t.size());
  rows_dh.reserve(model.t.size());
  for (std::size_t i = 0; i < model.t.size(); ++i) {
    rows_h.push_back({model.t[i], model.h[i]});
    rows_dh.push_back({model.t[i], model.dh[i]});
  }
  write_csv(dir / (stem + "_h.csv"), {"t", "h"}, rows_h);
  write_csv(dir / (stem + "_dh.csv"), {"t", "dh"}, rows_dh);
}

}  // namespace speclab
