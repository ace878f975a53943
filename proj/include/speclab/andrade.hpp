#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "speclab/common.hpp"
#include "speclab/patch.hpp"

namespace speclab {

/** Two radii with irrational ratio drive the construction; only r1 < r2 is
 *  checkable numerically, the irrationality hypothesis is metadata. */
struct AndradeParams {
  double r1 = 1.0;
  double r2 = 1.6180339887498949;  // golden ratio: a convenient irrational default

  double d() const { return r2 - r1; }
  double beta() const { return r1 / r2 - 1.0; }          // exponent of H
  double c() const { return r1 / (2.0 * r2); }           // exponent of the height function
  double height_amp() const {                            // amplitude making chi conformal
    return 4.0 * (r2 / r1) * d() * std::sqrt(d() / r2);
  }

  void validate() const {
    require(r1 > 0 && r2 > 0, "radii must be positive");
    require(r1 < r2, "need r1 < r2");
  }
};

inline double andrade_lambda(const AndradeParams& p, double u) {
  double d = p.d();
  return d * std::exp(u) + (d * d / p.r2) * std::exp(p.beta() * u);
}

/** |L'H' - (dh/dz)^2| at z; vanishes identically for the construction. */
inline double andrade_conformality_residual(const AndradeParams& p, double u, double v) {
  using cplx = std::complex<double>;
  cplx z(u, v);
  double d = p.d();
  cplx Lp = -d * std::exp(z);
  cplx Hp = (d * d / p.r2) * std::exp(p.beta() * z);
  cplx hz = cplx(0, 1) * (p.height_amp() * p.c() / 2.0) * std::exp(p.c() * z);
  return std::abs(Lp * Hp - hz * hz);
}

inline ConformalPatch andrade_surface(const AndradeParams& params, double u_half_width,
                                      double v_extent) {
  params.validate();
  require(u_half_width > 0 && u_half_width <= 1, "u_half_width must lie in (0, 1]");
  require(v_extent > 0, "v_extent must be positive");

  double d = params.d();
  double beta = params.beta();
  double c = params.c();
  double A = params.height_amp();

  ConformalPatch patch;
  patch.domain = {-u_half_width, u_half_width, -v_extent, v_extent};
  patch.lambda = [params](double u, double) { return andrade_lambda(params, u); };
  patch.immersion = [d, beta, c, A](double u, double v) {
    double eu = std::exp(u), ebu = std::exp(beta * u);
    double x = d * (ebu * std::cos(beta * v) - eu * std::cos(v));
    double y = -d * (eu * std::sin(v) + ebu * std::sin(beta * v));
    double z = -A * std::exp(c * u) * std::sin(c * v);
    return Eigen::Vector3d(x, y, z);
  };
  patch.descriptor = "andrade(r1=" + format_double(params.r1) +
                     ",r2=" + format_double(params.r2) + ")";

  double worst = 0;
  for (double u : {-u_half_width, 0.0, u_half_width})
    for (double v : {-v_extent, 0.0, v_extent})
      worst = std::max(worst, andrade_conformality_residual(params, u, v));
  patch.metadata["conformality_residual"] = format_double(worst);
  patch.metadata["ratio_irrational"] = "assumed (untestable numerically)";
  return patch;
}

/** K = -lambda^{-2} Delta_flat log(lambda) by a 5-point stencil; the operation
 *  the acceptance checks exercise. */
inline double andrade_curvature(const AndradeParams& params, double u, double v,
                                double fd_step = 1e-3) {
  params.validate();
  require(fd_step > 0, "fd_step must be positive");
  auto ll = [&](double uu, double vv) {
    (void)vv;
    return std::log(andrade_lambda(params, uu));
  };
  double lap = (ll(u + fd_step, v) + ll(u - fd_step, v) + ll(u, v + fd_step) +
                ll(u, v - fd_step) - 4.0 * ll(u, v)) /
               (fd_step * fd_step);
  double lam = andrade_lambda(params, u);
  return -lap / (lam * lam);
}

/** Shape exponents of the curvature closed form; only the two coefficients
 *  are free and get fitted. */
inline double andrade_shape_p(const AndradeParams& p) { return 1.0 - p.r1 / (4.0 * p.r2); }
inline double andrade_shape_q(const AndradeParams& p) { return 3.0 * p.r1 / (4.0 * p.r2) - 1.0; }

struct AndradeCurvatureFit {
  double c1 = 0, c2 = 0;       // fitted coefficients of -c1 (e^{pu} + c2 e^{qu})^{-4}
  double p = 0, q = 0;         // shape exponents (fixed, not fitted)
  double max_rel_residual = 0; // fitted form vs finite-difference curvature
};

inline AndradeCurvatureFit fit_andrade_curvature(const AndradeParams& params, double u_half_width,
                                                 std::size_t n_samples = 64) {
  params.validate();
  require(n_samples >= 4, "need >= 4 fit samples");
  double p = andrade_shape_p(params), q = andrade_shape_q(params);

  Eigen::MatrixXd design(n_samples, 2);
  Eigen::VectorXd target(n_samples);
  std::vector<double> us(n_samples), ks(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    double u = -u_half_width +
               2.0 * u_half_width * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    double K = andrade_curvature(params, u, 0.0);
    require_numeric(K < 0, "curvature must be negative");
    us[i] = u;
    ks[i] = K;
    design(static_cast<Eigen::Index>(i), 0) = std::exp(p * u);
    design(static_cast<Eigen::Index>(i), 1) = std::exp(q * u);
    target(static_cast<Eigen::Index>(i)) = std::pow(-K, -0.25);
  }
  Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  require_numeric(coef[0] > 0, "degenerate curvature fit");

  AndradeCurvatureFit fit;
  fit.p = p;
  fit.q = q;
  fit.c1 = std::pow(coef[0], -4.0);
  fit.c2 = coef[1] / coef[0];
  for (std::size_t i = 0; i < n_samples; ++i) {
    double model = -fit.c1 / std::pow(std::exp(p * us[i]) + fit.c2 * std::exp(q * us[i]), 4.0);
    fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(model - ks[i]) / std::abs(ks[i]));
  }
  return fit;
}

/** Pointwise positive lower bound for lambda (AM-GM); the sharp constant the
 *  patch actually satisfies on all of U. */
inline double andrade_lambda_floor(const AndradeParams& p, double u) {
  double d = p.d();
  return 2.0 * std::sqrt(d * d * d / p.r2) * std::exp((p.r1 / (2.0 * p.r2)) * u);
}

}  // namespace speclab
