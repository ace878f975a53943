#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "speclab/common.hpp"
#include "speclab/io.hpp"
#include "speclab/pointcloud.hpp"

namespace speclab {

struct Domain {
  double u0 = 0, u1 = 1, v0 = 0, v1 = 1;

  double width() const { return u1 - u0; }
  double height() const { return v1 - v0; }
  double diameter() const { return std::hypot(width(), height()); }
  bool contains(double u, double v) const { return u >= u0 && u <= u1 && v >= v0 && v <= v1; }
};

/** Parameter rectangle + conformal factor; immersion and sub-rectangle region
 *  mask are optional. All closures are pure. */
struct ConformalPatch {
  Domain domain;
  std::function<double(double, double)> lambda;
  std::function<Eigen::Vector3d(double, double)> immersion;  // may be empty
  std::function<bool(double, double)> region;                // empty = whole rectangle
  std::string descriptor;
  std::map<std::string, std::string> metadata;

  bool has_immersion() const { return static_cast<bool>(immersion); }

  bool inside(double u, double v) const {
    return domain.contains(u, v) && (!region || region(u, v));
  }
};

inline ConformalPatch flat_disk(double R) {
  require(R > 0, "R must be positive");
  ConformalPatch patch;
  patch.domain = {-R, R, -R, R};
  patch.lambda = [](double, double) { return 1.0; };
  patch.region = [R](double u, double v) { return u * u + v * v < R * R; };
  patch.immersion = [](double u, double v) { return Eigen::Vector3d(u, v, 0.0); };
  patch.descriptor = "flat-disk(R=" + format_double(R) + ")";
  return patch;
}

inline ConformalPatch hyperbolic_disk(double eps) {
  require(eps > 0 && eps < 0.25, "truncation must lie in (0, 1/4)");
  double rho = 1.0 - eps;
  ConformalPatch patch;
  patch.domain = {-rho, rho, -rho, rho};
  patch.lambda = [](double u, double v) { return 2.0 / (1.0 - (u * u + v * v)); };
  patch.region = [rho](double u, double v) { return u * u + v * v < rho * rho; };
  patch.descriptor = "hyperbolic-disk(eps=" + format_double(eps) + ")";
  return patch;
}

/** Riemannian area of {region && extra} by midpoint quadrature on cell centers. */
inline double patch_area(const ConformalPatch& patch, double dx,
                         const std::function<bool(double, double)>& extra = nullptr) {
  require(dx > 0, "dx must be positive");
  auto nx = static_cast<std::size_t>(std::ceil(patch.domain.width() / dx));
  auto ny = static_cast<std::size_t>(std::ceil(patch.domain.height() / dx));
  require(nx >= 2 && ny >= 2, "dx does not resolve the domain");
  double total = 0;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double u = patch.domain.u0 + (static_cast<double>(i) + 0.5) * dx;
      double v = patch.domain.v0 + (static_cast<double>(j) + 0.5) * dx;
      if (!patch.inside(u, v)) continue;
      if (extra && !extra(u, v)) continue;
      double lam = patch.lambda(u, v);
      total += lam * lam * dx * dx;
    }
  return total;
}

/** Worst-case first-fundamental-form deviation from lambda^2 * id over the
 *  given parameter points (central differences on the immersion). */
struct MetricConsistency {
  double max_scale_dev = 0;  // max |(|chi_u|^2 or |chi_v|^2) - lambda^2| / lambda^2
  double max_cross = 0;      // max |<chi_u, chi_v>| / lambda^2
};

inline MetricConsistency metric_consistency(const ConformalPatch& patch,
                                            const std::vector<std::pair<double, double>>& points,
                                            double fd_step = 1e-5) {
  require(patch.has_immersion(), "patch has no immersion");
  MetricConsistency out;
  for (auto [u, v] : points) {
    Eigen::Vector3d du =
        (patch.immersion(u + fd_step, v) - patch.immersion(u - fd_step, v)) / (2 * fd_step);
    Eigen::Vector3d dv =
        (patch.immersion(u, v + fd_step) - patch.immersion(u, v - fd_step)) / (2 * fd_step);
    double lam2 = patch.lambda(u, v);
    lam2 *= lam2;
    out.max_scale_dev = std::max(out.max_scale_dev, std::abs(du.squaredNorm() - lam2) / lam2);
    out.max_scale_dev = std::max(out.max_scale_dev, std::abs(dv.squaredNorm() - lam2) / lam2);
    out.max_cross = std::max(out.max_cross, std::abs(du.dot(dv)) / lam2);
  }
  return out;
}

/** Ambient samples of the immersion over the collar of parameter points within
 *  boundary_margin of leaving the patch; approximates the limit set. */
inline PointCloud limit_set_sample(const ConformalPatch& patch, double boundary_margin,
                                   std::size_t count, std::uint64_t seed = 20260815,
                                   std::vector<std::pair<double, double>>* params_out = nullptr) {
  require(patch.has_immersion(), "limit-set sampling needs an immersion");
  require(boundary_margin > 0, "boundary_margin must be positive");
  require(count > 0, "count must be positive");

  auto near_escape = [&](double u, double v) {
    if (!patch.inside(u, v)) return false;
    const double m = boundary_margin;
    const double diag = m / std::sqrt(2.0);
    const double probes[8][2] = {{m, 0},       {-m, 0},       {0, m},        {0, -m},
                                 {diag, diag}, {diag, -diag}, {-diag, diag}, {-diag, -diag}};
    for (const auto& p : probes)
      if (!patch.inside(u + p[0], v + p[1])) return true;
    return false;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick_u(patch.domain.u0, patch.domain.u1);
  std::uniform_real_distribution<double> pick_v(patch.domain.v0, patch.domain.v1);

  PointCloud cloud;
  cloud.dim = 3;
  std::size_t attempts = 0, cap = 20000 * count;
  while (cloud.count() < count) {
    require_numeric(attempts++ < cap, "empty escape region");
    double u = pick_u(rng), v = pick_v(rng);
    if (!near_escape(u, v)) continue;
    Eigen::Vector3d x = patch.immersion(u, v);
    cloud.push({x[0], x[1], x[2]});
    if (params_out) params_out->emplace_back(u, v);
  }
  return cloud;
}

inline void write_patch_csv(const ConformalPatch& patch, std::size_t n_u, std::size_t n_v,
                            const std::filesystem::path& path) {
  require(n_u >= 2 && n_v >= 2, "need at least a 2x2 sample grid");
  std::vector<std::vector<double>> rows;
  bool with_immersion = patch.has_immersion();
  for (std::size_t j = 0; j < n_v; ++j)
    for (std::size_t i = 0; i < n_u; ++i) {
      double u = patch.domain.u0 +
                 patch.domain.width() * static_cast<double>(i) / static_cast<double>(n_u - 1);
      double v = patch.domain.v0 +
                 patch.domain.height() * static_cast<double>(j) / static_cast<double>(n_v - 1);
      if (!patch.inside(u, v)) continue;
      if (with_immersion) {
        Eigen::Vector3d x = patch.immersion(u, v);
        rows.push_back({u, v, x[0], x[1], x[2]});
      } else {
        rows.push_back({u, v, patch.lambda(u, v)});
      }
    }
  if (with_immersion) write_csv(path, {"u", "v", "x", "y", "z"}, rows);
  else write_csv(path, {"u", "v", "lambda"}, rows);
}

}  // namespace speclab
