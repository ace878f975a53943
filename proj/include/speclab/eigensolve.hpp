#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "speclab/common.hpp"
#include "speclab/discretize.hpp"

namespace speclab {

struct EigenOptions {
  int k = 1;
  double tol = 1e-10;  // residual contract: ||Av - mu Mv||_{M^-1} <= tol * max(1, mu)
  int max_iter = 300;
  int block_extra = 8;
  std::uint64_t seed = 12345;
  int refine_steps = 0;  // extra inverse iterations on the ground pair after convergence
};

struct EigenResult {
  std::vector<double> values;     // ascending
  Eigen::MatrixXd vectors;        // columns M-orthonormal, one per value
  std::vector<double> residuals;  // ||A v - mu M v||_{M^-1} per pair
  int iterations = 0;
  bool converged = false;
};

/** k smallest generalized eigenpairs of A v = mu M v (A sparse SPD, M positive
 *  diagonal) by shift-invert subspace iteration with Rayleigh-Ritz extraction. */
inline EigenResult smallest_eigs(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& M,
                                 EigenOptions opt = {}) {
  const auto n = A.rows();
  require(A.cols() == n && M.size() == n, "matrix shape mismatch");
  require(opt.k >= 1 && opt.k <= n, "k out of range");
  require(opt.tol > 0, "tolerance must be positive");
  require((M.array() > 0).all(), "mass must be positive");

  const auto block = std::min<Eigen::Index>(n, opt.k + std::max(1, opt.block_extra));
  Eigen::VectorXd sqrt_m = M.array().sqrt();

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index c = 0; c < block; ++c)
    for (Eigen::Index r = 0; r < n; ++r) X(r, c) = gauss(rng);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.analyzePattern(A);
  solver.factorize(A);
  require_numeric(solver.info() == Eigen::Success, "stiffness factorization failed");

  // Clustered spectra (thin annuli) make plain inverse iteration crawl, so the
  // shift chases the bottom Ritz value. The 2*res safety keeps sigma below the
  // eigenvalue the Ritz pair is converging to, preserving definiteness.
  Eigen::VectorXd base_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) base_diag[i] = A.coeff(i, i);
  double sigma = 0.0;
  Eigen::SparseMatrix<double> shifted = A;
  auto tighten_shift = [&](double mu0, double res0) {
    const double target = mu0 - std::max(0.05 * (mu0 - sigma), 2.0 * res0);
    if (!(target > sigma)) return;
    for (Eigen::Index i = 0; i < n; ++i)
      shifted.coeffRef(i, i) = base_diag[i] - target * M[i];
    solver.factorize(shifted);
    if (solver.info() == Eigen::Success) {
      sigma = target;
      return;
    }
    // overshot past the bottom eigenvalue: restore the last good factorization
    for (Eigen::Index i = 0; i < n; ++i)
      shifted.coeffRef(i, i) = base_diag[i] - sigma * M[i];
    solver.factorize(shifted);
    require_numeric(solver.info() == Eigen::Success, "shift refactorization failed");
  };

  EigenResult result;
  Eigen::VectorXd ritz;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    Eigen::MatrixXd Y = solver.solve(M.asDiagonal() * X);
    require_numeric(Y.allFinite(), "shift-invert solve produced non-finite values");

    // M-orthonormalize Y through a QR of the sqrt(M)-scaled block
    Eigen::MatrixXd Z = sqrt_m.asDiagonal() * Y;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    Y = sqrt_m.cwiseInverse().asDiagonal() * Q;

    Eigen::MatrixXd AY = A * Y;
    Eigen::MatrixXd S = Y.transpose() * AY;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz_solve((S + S.transpose()) / 2);
    require_numeric(ritz_solve.info() == Eigen::Success, "Rayleigh-Ritz extraction failed");
    ritz = ritz_solve.eigenvalues();
    X = Y * ritz_solve.eigenvectors();

    result.iterations = iter;
    result.residuals.assign(static_cast<std::size_t>(opt.k), 0.0);
    bool all_ok = true;
    for (int b = 0; b < opt.k; ++b) {
      Eigen::VectorXd r = A * X.col(b) - ritz[b] * (M.asDiagonal() * X.col(b));
      double res = std::sqrt((r.array().square() / M.array()).sum());
      result.residuals[static_cast<std::size_t>(b)] = res;
      if (res > opt.tol * std::max(1.0, std::abs(ritz[b]))) all_ok = false;
    }
    if (all_ok) {
      result.converged = true;
      break;
    }
    if (iter % 12 == 0 && iter < opt.max_iter)
      tighten_shift(ritz[0], result.residuals[0]);
  }

  if (!result.converged) {
    std::ostringstream msg;
    msg << "eigensolver did not converge in " << opt.max_iter
        << " iterations; best residuals:";
    for (double r : result.residuals) msg << " " << r;
    throw numerical_error(msg.str());
  }

  result.values.assign(ritz.data(), ritz.data() + opt.k);
  result.vectors = X.leftCols(opt.k);

  // Optional polish of the ground pair: plain inverse iteration converges to
  // the smallest pair, so it is applied to pair 0 only, kept while improving.
  if (opt.refine_steps > 0) {
    Eigen::VectorXd v = result.vectors.col(0);
    double mu = result.values[0];
    double best = result.residuals[0];
    for (int step = 0; step < opt.refine_steps; ++step) {
      Eigen::VectorXd y = solver.solve(M.asDiagonal() * v);
      require_numeric(y.allFinite(), "refinement solve produced non-finite values");
      y /= std::sqrt((y.array().square() * M.array()).sum());
      const double mu_y = y.dot(A * y);
      Eigen::VectorXd r = A * y - mu_y * (M.asDiagonal() * y);
      const double res = std::sqrt((r.array().square() / M.array()).sum());
      if (!(res < best)) break;
      v = y;
      mu = mu_y;
      best = res;
    }
    result.vectors.col(0) = v;
    result.values[0] = mu;
    result.residuals[0] = best;
  }
  return result;
}

inline EigenResult smallest_eigs(const GridDiscretization& dis, EigenOptions opt = {}) {
  return smallest_eigs(dis.stiffness, dis.mass, opt);
}

}  // namespace speclab
