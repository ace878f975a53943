#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "speclab/common.hpp"
#include "speclab/io.hpp"
#include "speclab/patch.hpp"

namespace speclab {

using RegionPredicate = std::function<bool(double, double)>;

/** Dirichlet discretization of -Delta_g on the patch: vertex lattice, 5-point
 *  stiffness with unit interior edges, and fractional (cut-cell) weights on
 *  edges that cross the region or exclusion boundary. Mass is the diagonal
 *  lambda^2 dx^2. */
struct GridDiscretization {
  double dx = 0;
  std::size_t nx = 0, ny = 0;  // lattice spans (nx+1) x (ny+1) points
  double u0 = 0, v0 = 0;
  std::vector<std::int64_t> node;  // lattice point -> node id, -1 when eliminated
  std::vector<std::uint32_t> cell_i, cell_j;
  std::vector<double> lambda_at;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;
  std::size_t clipped_cuts = 0;  // cut fractions clamped at the 0.05 floor

  std::size_t n() const { return cell_i.size(); }

  std::int64_t node_at(std::size_t i, std::size_t j) const { return node[j * (nx + 1) + i]; }

  std::pair<double, double> position(std::size_t id) const {
    return {u0 + static_cast<double>(cell_i[id]) * dx,
            v0 + static_cast<double>(cell_j[id]) * dx};
  }
};

namespace detail {

/** Largest fraction of the unit step from p toward q that stays inside. */
inline double cut_fraction(const std::function<bool(double, double)>& inside, double pu,
                           double pv, double qu, double qv) {
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 50; ++iter) {
    double mid = (lo + hi) / 2;
    if (inside(pu + mid * (qu - pu), pv + mid * (qv - pv))) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace detail

inline GridDiscretization discretize(const ConformalPatch& patch, double dx_req,
                                     const RegionPredicate& excluded = nullptr) {
  require(dx_req > 0, "grid spacing must be positive");
  const Domain& dom = patch.domain;
  auto nx = static_cast<std::size_t>(std::llround(dom.width() / dx_req));
  require(nx >= 32, "grid must resolve the domain: >= 32 steps per side");
  double dx = dom.width() / static_cast<double>(nx);
  auto ny = static_cast<std::size_t>(std::llround(dom.height() / dx));
  require(ny >= 32, "grid must resolve the domain: >= 32 steps per side");
  require(std::abs(static_cast<double>(ny) * dx - dom.height()) <= 1e-6 * dx,
          "domain aspect is incompatible with a square grid");

  GridDiscretization dis;
  dis.dx = dx;
  dis.nx = nx;
  dis.ny = ny;
  dis.u0 = dom.u0;
  dis.v0 = dom.v0;

  auto pos_u = [&](std::size_t i) { return dom.u0 + static_cast<double>(i) * dx; };
  auto pos_v = [&](std::size_t j) { return dom.v0 + static_cast<double>(j) * dx; };
  auto inside_full = [&](double u, double v) {
    if (u <= dom.u0 || u >= dom.u1 || v <= dom.v0 || v >= dom.v1) return false;
    if (patch.region && !patch.region(u, v)) return false;
    if (excluded && excluded(u, v)) return false;
    return true;
  };

  dis.node.assign((nx + 1) * (ny + 1), -1);
  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 1; i < nx; ++i) {
      double u = pos_u(i), v = pos_v(j);
      if (patch.region && !patch.region(u, v)) continue;
      if (excluded && excluded(u, v)) continue;
      dis.node[j * (nx + 1) + i] = static_cast<std::int64_t>(dis.n());
      dis.cell_i.push_back(static_cast<std::uint32_t>(i));
      dis.cell_j.push_back(static_cast<std::uint32_t>(j));
    }
  require(dis.n() > 0, "empty interior after exclusion");

  dis.lambda_at.resize(dis.n());
  dis.mass.resize(static_cast<Eigen::Index>(dis.n()));
  for (std::size_t id = 0; id < dis.n(); ++id) {
    auto [u, v] = dis.position(id);
    double lam = patch.lambda(u, v);
    require_numeric(std::isfinite(lam) && lam > 0, "conformal factor must be positive finite");
    dis.lambda_at[id] = lam;
    dis.mass[static_cast<Eigen::Index>(id)] = lam * lam * dx * dx;
  }

  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(dis.n() * 5);
  for (std::size_t id = 0; id < dis.n(); ++id) {
    std::size_t i = dis.cell_i[id], j = dis.cell_j[id];
    double pu = pos_u(i), pv = pos_v(j);
    double diag = 0;
    for (int dir = 0; dir < 4; ++dir) {
      std::size_t qi = i + static_cast<std::size_t>(di[dir]);
      std::size_t qj = j + static_cast<std::size_t>(dj[dir]);
      std::int64_t q = dis.node_at(qi, qj);
      if (q >= 0) {
        diag += 1.0;
        trips.emplace_back(static_cast<int>(id), static_cast<int>(q), -1.0);
        continue;
      }
      double qu = pos_u(qi), qv = pos_v(qj);
      bool on_wall = (qi == 0 || qi == nx || qj == 0 || qj == ny);
      bool wall_only = on_wall && (!patch.region || patch.region(qu, qv)) &&
                       (!excluded || !excluded(qu, qv));
      double alpha = wall_only ? 1.0 : detail::cut_fraction(inside_full, pu, pv, qu, qv);
      if (alpha < 0.05) {
        alpha = 0.05;
        ++dis.clipped_cuts;
      }
      diag += 1.0 / alpha;
    }
    trips.emplace_back(static_cast<int>(id), static_cast<int>(id), diag);
  }
  dis.stiffness.resize(static_cast<Eigen::Index>(dis.n()), static_cast<Eigen::Index>(dis.n()));
  dis.stiffness.setFromTriplets(trips.begin(), trips.end());
  dis.stiffness.makeCompressed();
  return dis;
}

inline void write_problem(const GridDiscretization& dis, const std::filesystem::path& dir,
                          const std::string& stem) {
  write_matrix_market(dir / (stem + "_stiffness.mtx"), dis.stiffness);
  std::vector<std::vector<double>> rows;
  rows.reserve(dis.n());
  for (std::size_t id = 0; id < dis.n(); ++id) {
    auto [u, v] = dis.position(id);
    rows.push_back({u, v, dis.mass[static_cast<Eigen::Index>(id)]});
  }
  write_csv(dir / (stem + "_mass.csv"), {"u", "v", "mass"}, rows);
}

}  // namespace speclab
