#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "speclab/common.hpp"
#include "speclab/patch.hpp"

namespace speclab {

/** One annular stage of the labyrinth metric, modeled on an unrolled strip
 *  [0, r_n] x [0, aspect*r_n] with an explicit affine stand-in for the
 *  Runge-approximated harmonic exponent. */
struct LabyrinthParams {
  int n = 1;
  double r_n = 1.0;
  double c_n = 1.0;  // the classical choice couples this to r_n
  double aspect = 4.0;
  std::complex<double> eps{0.0, 0.0};  // surrogate h(z) = c_n + eps*z

  static LabyrinthParams from_index(int n) {
    require(n >= 1, "annulus index must be >= 1");
    LabyrinthParams p;
    p.n = n;
    p.r_n = 1.0 / static_cast<double>(n);
    p.c_n = p.r_n;
    double diam = p.r_n * std::hypot(1.0, p.aspect);
    p.eps = {1.0 / (2.0 * diam), 0.0};
    return p;
  }

  double diameter() const { return r_n * std::hypot(1.0, aspect); }

  void validate() const {
    require(n >= 1, "annulus index must be >= 1");
    require(r_n > 0, "r_n must be positive");
    require(c_n > 0, "c_n must be positive");
    require(aspect > 0, "aspect must be positive");
    require(std::abs(eps) * diameter() < 1.0, "surrogate exponent leaves |h - c_n| < 1");
  }
};

inline double labyrinth_Cn(const LabyrinthParams& p) {
  return (std::exp(p.c_n - 1.0) + std::exp(-p.c_n - 1.0)) / 2.0;
}

/** Certified length of any inner-to-outer crossing of the strip. */
inline double labyrinth_crossing_bound(const LabyrinthParams& p) {
  return p.r_n * std::exp(p.c_n - 1.0) / 2.0;
}

inline ConformalPatch labyrinth_patch(const LabyrinthParams& params) {
  params.validate();
  double cn = params.c_n;
  double er = params.eps.real(), ei = params.eps.imag();

  ConformalPatch patch;
  patch.domain = {0.0, params.r_n, 0.0, params.aspect * params.r_n};
  patch.lambda = [cn, er, ei](double u, double v) { return std::cosh(cn + er * u - ei * v); };
  patch.descriptor = "labyrinth(n=" + std::to_string(params.n) + ")";

  double Cn = labyrinth_Cn(params);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  const int N = 64;
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) {
      double u = patch.domain.u0 + patch.domain.width() * i / static_cast<double>(N);
      double v = patch.domain.v0 + patch.domain.height() * j / static_cast<double>(N);
      double ratio = patch.lambda(u, v) / Cn;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  require_numeric(lo >= 1.0 - 1e-12 && hi <= std::exp(2.0) + 1e-12,
                  "metric left the certified [C_n, e^2 C_n] band");
  patch.metadata["C_n"] = format_double(Cn);
  patch.metadata["band_min"] = format_double(lo);
  patch.metadata["band_max"] = format_double(hi);
  patch.metadata["crossing_bound"] = format_double(labyrinth_crossing_bound(params));
  return patch;
}

/** Intrinsic strip width: integral of lambda across u at mid-height. */
inline double labyrinth_intrinsic_width(const LabyrinthParams& params, int quad_points = 256) {
  params.validate();
  auto patch_lambda = [&](double u) {
    double v_mid = params.aspect * params.r_n / 2.0;
    return std::cosh(params.c_n + params.eps.real() * u - params.eps.imag() * v_mid);
  };
  double h = params.r_n / quad_points;
  double acc = (patch_lambda(0.0) + patch_lambda(params.r_n)) / 2.0;
  for (int i = 1; i < quad_points; ++i) acc += patch_lambda(i * h);
  return acc * h;
}

/** Partial sums of the even-index crossing lengths for the harmonic-choice
 *  family r_n = c_n = 1/n; divergence of this series is what forces the
 *  complete metric. Returns (n, partial sum) pairs. */
inline std::vector<std::pair<int, double>> labyrinth_divergence_diagnostic(int n_max) {
  require(n_max >= 2, "need n_max >= 2");
  std::vector<std::pair<int, double>> sums;
  double acc = 0;
  for (int n = 2; n <= n_max; n += 2) {
    double rn = 1.0 / n;
    acc += rn * std::exp(rn - 1.0);
    sums.emplace_back(n, acc);
  }
  return sums;
}

}  // namespace speclab
