#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "speclab/common.hpp"
#include "speclab/pointcloud.hpp"

namespace speclab {

/** Covering gauge: a weight Psi(diam) for covering sums, valid for arguments
 *  below delta0.  Built-in kinds cover the quadratic, quadratic-log and power
 *  families; `custom` accepts any closure that vanishes at 0 and stays
 *  positive below 2*delta0. */
struct CoverGauge {
  std::function<double(double)> psi;
  double delta0 = 1.0;
  std::string descriptor;

  static CoverGauge square(double delta0 = 1.0) {
    require(delta0 > 0.0, "gauge validity radius must be positive");
    return {[](double t) { return t * t; }, delta0, "t^2"};
  }

  // t^2 |log t| vanishes at t = 1, so the validity radius must keep 2*delta0
  // strictly below 1.
  static CoverGauge square_log(double delta0 = 0.25) {
    require(delta0 > 0.0 && delta0 < 0.5, "square-log gauge needs delta0 in (0, 1/2)");
    return {[](double t) { return t * t * std::abs(std::log(t)); }, delta0, "t^2|log t|"};
  }

  static CoverGauge power(double theta, double delta0 = 1.0) {
    require(theta > 0.0, "power gauge exponent must be positive");
    require(delta0 > 0.0, "gauge validity radius must be positive");
    return {[theta](double t) { return std::pow(t, theta + 1.0); }, delta0,
            "t^" + std::to_string(theta + 1.0)};
  }

  static CoverGauge custom(std::function<double(double)> fn, double delta0,
                           std::string descriptor) {
    require(static_cast<bool>(fn), "custom gauge needs a callable");
    require(delta0 > 0.0, "gauge validity radius must be positive");
    CoverGauge g{std::move(fn), delta0, std::move(descriptor)};
    g.validate();
    return g;
  }

  /** Checked evaluation; arguments at or above delta0 are outside the gauge's
   *  declared validity and rejected. */
  double eval(double t) const {
    require(t > 0.0 && t < delta0, "gauge argument outside (0, delta0)");
    const double v = psi(t);
    require_numeric(std::isfinite(v) && v > 0.0, "gauge value must be finite positive");
    return v;
  }

  void validate() const {
    // Positivity on log-spaced samples of (0, 2*delta0) and decay toward 0.
    double top = 0.0;
    for (int i = 0; i < 48; ++i) {
      const double t = 2.0 * delta0 * 0.999 * std::pow(10.0, -9.0 * i / 47.0);
      const double v = psi(t);
      require(std::isfinite(v) && v > 0.0, "gauge must be positive on (0, 2*delta0)");
      top = std::max(top, v);
    }
    require(psi(1e-15 * delta0) <= 0.5 * top, "gauge must vanish at 0");
  }
};

/** Largest sampled ratio Psi(2t)/Psi(t) over log-spaced t below delta0. */
inline double doubling_constant(const CoverGauge& g, int samples = 256) {
  require(samples >= 2, "need at least two samples");
  double sup = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = g.delta0 * (1.0 - 1e-12) * std::pow(10.0, -9.0 * i / (samples - 1.0));
    const double ratio = g.psi(2.0 * t) / g.psi(t);
    require_numeric(std::isfinite(ratio), "doubling ratio must be finite");
    sup = std::max(sup, ratio);
  }
  return sup;
}

enum class CoverStrategy { grid, greedy };

inline const char* to_string(CoverStrategy s) {
  return s == CoverStrategy::grid ? "grid" : "greedy";
}

/** One realized cover at a single scale: the covering sum, the balls that
 *  achieve it, and how densely the sample populates them. */
struct CoverEstimate {
  double delta = 0.0;
  double sum = 0.0;
  std::size_t cardinality = 0;
  CoverStrategy strategy = CoverStrategy::grid;
  struct Ball {
    std::vector<double> center;
    double radius = 0.0;
    std::size_t hits = 0;  // sample points resolved to this ball
  };
  std::vector<Ball> balls;

  double mean_occupancy() const {
    std::size_t total = 0;
    for (const auto& b : balls) total += b.hits;
    return cardinality > 0 ? static_cast<double>(total) / static_cast<double>(cardinality) : 0.0;
  }
};

namespace detail {

inline CoverEstimate grid_cover(const PointCloud& pts, const CoverGauge& g, double delta) {
  const int d = pts.dim;
  const double side = delta / std::sqrt(static_cast<double>(d));
  const auto box = pts.bounding_box();
  // Occupied axis boxes of side delta/sqrt(d), anchored at the bounding-box
  // corner; the circumscribed ball of each box has diameter exactly delta.
  std::map<std::vector<long long>, std::size_t> cells;
  std::vector<long long> key(d);
  for (std::size_t i = 0; i < pts.count(); ++i) {
    for (int k = 0; k < d; ++k)
      key[k] = static_cast<long long>(std::floor((pts.coord(i, k) - box.lo[k]) / side));
    ++cells[key];
  }
  CoverEstimate est;
  est.delta = delta;
  est.strategy = CoverStrategy::grid;
  est.cardinality = cells.size();
  est.sum = static_cast<double>(cells.size()) * g.eval(delta);
  est.balls.reserve(cells.size());
  for (const auto& [idx, hits] : cells) {
    CoverEstimate::Ball b;
    b.center.resize(d);
    for (int k = 0; k < d; ++k) b.center[k] = box.lo[k] + (idx[k] + 0.5) * side;
    b.radius = 0.5 * delta;
    b.hits = hits;
    est.balls.push_back(std::move(b));
  }
  return est;
}

inline CoverEstimate greedy_cover(const PointCloud& pts, const CoverGauge& g, double delta) {
  const int d = pts.dim;
  const std::size_t n = pts.count();
  const double r = 0.5 * delta;
  // Farthest-point traversal: each accepted center lies more than delta/2 from
  // all previous ones (a packing), and the loop stops once every sample point
  // is within delta/2 of a center (a cover by balls of diameter delta).
  std::vector<double> dist(n);
  std::vector<std::size_t> owner(n, 0);
  std::vector<std::size_t> centers{0};
  auto sqdist_to = [&](std::size_t i, std::size_t c) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = pts.coord(i, k) - pts.coord(c, k);
      s += diff * diff;
    }
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) dist[i] = sqdist_to(i, 0);
  while (true) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (dist[i] > dist[far]) far = i;
    if (dist[far] <= r * r) break;
    centers.push_back(far);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = sqdist_to(i, far);
      if (s < dist[i]) {
        dist[i] = s;
        owner[i] = centers.size() - 1;
      }
    }
  }
  CoverEstimate est;
  est.delta = delta;
  est.strategy = CoverStrategy::greedy;
  est.cardinality = centers.size();
  est.sum = static_cast<double>(centers.size()) * g.eval(delta);
  est.balls.resize(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    est.balls[c].center.resize(d);
    for (int k = 0; k < d; ++k) est.balls[c].center[k] = pts.coord(centers[c], k);
    est.balls[c].radius = r;
  }
  for (std::size_t i = 0; i < n; ++i) ++est.balls[owner[i]].hits;
  return est;
}

}  // namespace detail

/** Covering sum of the sample at one scale.  The grid strategy buckets points
 *  into axis boxes and charges the circumscribed ball; the greedy strategy
 *  runs a farthest-point packing and covers at radius delta/2. */
inline CoverEstimate cover_measure(const PointCloud& pts, const CoverGauge& g, double delta,
                                   CoverStrategy strategy = CoverStrategy::grid) {
  require(pts.dim >= 1 && pts.dim <= 8, "ambient dimension must be in [1, 8]");
  require(pts.count() > 0, "empty point cloud");
  require(delta > 0.0, "cover scale must be positive");
  require(delta < g.delta0, "cover scale must stay below the gauge validity radius");
  return strategy == CoverStrategy::grid ? detail::grid_cover(pts, g, delta)
                                         : detail::greedy_cover(pts, g, delta);
}

/** Packing lower bound: any cover of a set carrying `volume` of dim-volume by
 *  balls of diameter <= delta has covering sum at least
 *  inf_{t<=delta} Psi(t)/t^dim * 2^dim * volume / v_dim. */
inline double packing_lower_bound(const CoverGauge& g, double delta, int dim, double volume) {
  require(dim >= 1 && dim <= 8, "ambient dimension must be in [1, 8]");
  require(volume >= 0.0, "volume must be nonnegative");
  require(delta > 0.0 && delta < g.delta0, "cover scale must be in (0, delta0)");
  if (volume == 0.0) return 0.0;
  double floor_ratio = g.eval(delta) / std::pow(delta, dim);
  for (int i = 1; i <= 128; ++i) {
    const double t = delta * std::pow(10.0, -6.0 * i / 128.0);
    floor_ratio = std::min(floor_ratio, g.eval(t) / std::pow(t, dim));
  }
  const double unit_ball = std::pow(std::acos(-1.0), 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
  return floor_ratio * std::pow(2.0, dim) * volume / unit_ball;
}

enum class MeasureVerdict { vanishing, positive, inconclusive };

inline const char* to_string(MeasureVerdict v) {
  switch (v) {
    case MeasureVerdict::vanishing: return "vanishing";
    case MeasureVerdict::positive: return "positive";
    default: return "inconclusive";
  }
}

struct MeasureOptions {
  CoverStrategy strategy = CoverStrategy::grid;
  // Dim-volume of the underlying set, when the caller knows it; enables the
  // packing lower bound and the certified positive verdict.
  double reference_volume = 0.0;
  double min_occupancy = 4.0;   // sample points per ball below which verdicts degrade
  double vanish_slope = -0.3;   // log-sum vs log(1/delta) slope certifying decay
  double vanish_ratio = 0.25;   // final/initial sum ratio certifying decay
  double flat_slope = -0.15;    // slope floor for the heuristic positive verdict
  double flat_ratio = 0.5;      // min/max sum ratio floor for the same
  bool keep_balls = false;      // retain realized ball lists in the report
};

/** Scale sweep of covering sums.  `sums` records the cover realized at each
 *  scale; `envelope` is the best (smallest) sum achieved at that scale or any
 *  finer one, which is the monotone upper estimate of the measure. */
struct CoverReport {
  std::vector<double> deltas;
  std::vector<double> sums;
  std::vector<double> envelope;
  std::vector<std::size_t> cardinality;
  std::vector<double> occupancy;
  std::vector<double> packing_bound;  // zero entries when no volume was supplied
  std::string strategy;
  std::string gauge;
  double slope = 0.0;  // fitted d log(sum) / d log(1/delta)
  bool density_ok = true;
  MeasureVerdict verdict = MeasureVerdict::inconclusive;
  std::vector<CoverEstimate> covers;  // populated when keep_balls is set
};

/** Runs cover_measure across a decreasing scale schedule and classifies the
 *  trend.  Decaying sums certify a vanishing measure; sums pinned above the
 *  packing bound (or flat, when no reference volume is known) read positive;
 *  anything else — including schedules too fine for the sample density — is
 *  inconclusive. */
inline CoverReport measure_limit(const PointCloud& pts, const CoverGauge& g,
                                 const std::vector<double>& deltas,
                                 const MeasureOptions& opt = {}) {
  require(deltas.size() >= 5, "scale schedule needs at least five entries");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    require(deltas[i] < deltas[i - 1], "scale schedule must be strictly decreasing");

  CoverReport rep;
  rep.strategy = to_string(opt.strategy);
  rep.gauge = g.descriptor;
  rep.deltas = deltas;
  for (double delta : deltas) {
    CoverEstimate est = cover_measure(pts, g, delta, opt.strategy);
    rep.sums.push_back(est.sum);
    rep.cardinality.push_back(est.cardinality);
    rep.occupancy.push_back(est.mean_occupancy());
    rep.packing_bound.push_back(
        opt.reference_volume > 0.0 ? packing_lower_bound(g, delta, pts.dim, opt.reference_volume)
                                   : 0.0);
    if (opt.keep_balls) rep.covers.push_back(std::move(est));
  }

  // A cover admissible at some scale is admissible at every coarser one, so
  // the scale-delta upper estimate is the min over this and finer scales.
  rep.envelope.assign(rep.sums.size(), 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = rep.sums.size(); i-- > 0;) {
    best = std::min(best, rep.sums[i]);
    rep.envelope[i] = best;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double x = std::log(1.0 / deltas[i]);
    const double y = std::log(rep.sums[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  for (double occ : rep.occupancy)
    if (occ < opt.min_occupancy) rep.density_ok = false;

  const double first = rep.sums.front();
  const double last = rep.sums.back();
  const double lo = *std::min_element(rep.sums.begin(), rep.sums.end());
  const double hi = *std::max_element(rep.sums.begin(), rep.sums.end());
  if (!rep.density_ok) {
    rep.verdict = MeasureVerdict::inconclusive;
  } else if (rep.slope <= opt.vanish_slope && last <= opt.vanish_ratio * first) {
    rep.verdict = MeasureVerdict::vanishing;
  } else if (opt.reference_volume > 0.0) {
    bool above = true;
    for (std::size_t i = 0; i < rep.sums.size(); ++i)
      if (rep.envelope[i] < rep.packing_bound[i]) above = false;
    rep.verdict = above ? MeasureVerdict::positive : MeasureVerdict::inconclusive;
  } else if (rep.slope >= opt.flat_slope && lo >= opt.flat_ratio * hi) {
    rep.verdict = MeasureVerdict::positive;
  }
  return rep;
}

struct DimensionFit {
  double dimension = 0.0;
  double rms = 0.0;  // residual of the log-log fit
  std::size_t scales = 0;
  bool ok = false;
};

/** Box-counting dimension: least-squares slope of log(cardinality) against
 *  log(1/delta) over the schedule.  Degenerate fits (too few scales or a
 *  collapsed abscissa) come back with ok = false. */
inline DimensionFit dimension_fit(const PointCloud& pts, const std::vector<double>& deltas) {
  DimensionFit fit;
  if (deltas.size() < 5) return fit;
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) return fit;

  const CoverGauge probe = CoverGauge::square(2.0 * deltas.front());
  std::vector<double> xs, ys;
  for (double delta : deltas) {
    const CoverEstimate est = cover_measure(pts, probe, delta, CoverStrategy::grid);
    xs.push_back(std::log(1.0 / delta));
    ys.push_back(std::log(static_cast<double>(est.cardinality)));
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  if (det <= 1e-12 * n * sxx) return fit;
  fit.dimension = (n * sxy - sx * sy) / det;
  const double intercept = (sy - fit.dimension * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.dimension * xs[i] - intercept;
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  fit.scales = deltas.size();
  fit.ok = true;
  return fit;
}

/** Uniform sample of the unit segment [0,1] x {0} in the plane. */
inline PointCloud sample_unit_segment(std::size_t count, std::uint64_t seed = 7u) {
  require(count > 0, "sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud pts;
  pts.dim = 2;
  pts.xs.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) pts.push({u(rng), 0.0});
  return pts;
}

/** Uniform sample of the unit square [0,1]^2. */
inline PointCloud sample_unit_square(std::size_t count, std::uint64_t seed = 7u) {
  require(count > 0, "sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud pts;
  pts.dim = 2;
  pts.xs.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    pts.push({x, y});
  }
  return pts;
}

inline void write_cover_csv(const CoverReport& rep, const std::string& path) {
  std::ofstream out(path);
  require_numeric(out.good(), "cannot open output file");
  out << "delta,sum,envelope,cardinality,occupancy,packing_bound\n";
  out.precision(17);
  for (std::size_t i = 0; i < rep.deltas.size(); ++i)
    out << rep.deltas[i] << ',' << rep.sums[i] << ',' << rep.envelope[i] << ','
        << rep.cardinality[i] << ',' << rep.occupancy[i] << ',' << rep.packing_bound[i] << '\n';
  require_numeric(out.good(), "write failed");
}

inline void write_cover_balls_csv(const CoverEstimate& est, const std::string& path) {
  std::ofstream out(path);
  require_numeric(out.good(), "cannot open output file");
  const int d = est.balls.empty() ? 0 : static_cast<int>(est.balls.front().center.size());
  for (int k = 0; k < d; ++k) out << 'x' << k << ',';
  out << "radius,hits\n";
  out.precision(17);
  for (const auto& b : est.balls) {
    for (double c : b.center) out << c << ',';
    out << b.radius << ',' << b.hits << '\n';
  }
  require_numeric(out.good(), "write failed");
}

}  // namespace speclab
