#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "speclab/common.hpp"

namespace speclab {

using HessianSampler = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/** Per-point sums of the j smallest Hessian eigenvalues, plus the overall minimum. */
struct ConvexityMarginReport {
  std::vector<double> margins;
  double min_margin = 0;
  std::size_t arg_min = 0;

  bool passes(double c) const { return min_margin >= c; }
};

inline ConvexityMarginReport check_j_convex(const HessianSampler& hessian_sampler, int j,
                                            const std::vector<Eigen::VectorXd>& points,
                                            double symmetry_tol = 1e-9) {
  require(!points.empty(), "need at least one sample point");
  require(j >= 1, "j must be >= 1");
  ConvexityMarginReport report;
  report.margins.reserve(points.size());
  report.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < points.size(); ++p) {
    Eigen::MatrixXd hess = hessian_sampler(points[p]);
    require(hess.rows() == hess.cols(), "Hessian must be square");
    require(j <= hess.rows(), "j exceeds Hessian dimension");
    double scale = std::max(1.0, hess.cwiseAbs().maxCoeff());
    require((hess - hess.transpose()).cwiseAbs().maxCoeff() <= symmetry_tol * scale,
            "Hessian asymmetric beyond tolerance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        ((hess + hess.transpose()) / 2).eval(), Eigen::EigenvaluesOnly);
    require_numeric(eig.info() == Eigen::Success, "Hessian eigen-decomposition failed");
    double margin = eig.eigenvalues().head(j).sum();
    report.margins.push_back(margin);
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.arg_min = p;
    }
  }
  return report;
}

/** Central-difference Hessian of a scalar field; feeds check_j_convex for
 *  functions given only by evaluation. */
inline HessianSampler fd_hessian(const std::function<double(const Eigen::VectorXd&)>& field,
                                 double step = 1e-4) {
  require(step > 0, "step must be positive");
  return [field, step](const Eigen::VectorXd& x) {
    const auto n = x.size();
    Eigen::MatrixXd hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      hess(i, i) = (field(xp) - 2 * field(x) + field(xm)) / (step * step);
      for (Eigen::Index k = i + 1; k < n; ++k) {
        Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += step; xpp[k] += step;
        xpm[i] += step; xpm[k] -= step;
        xmp[i] -= step; xmp[k] += step;
        xmm[i] -= step; xmm[k] -= step;
        double v = (field(xpp) - field(xpm) - field(xmp) + field(xmm)) / (4 * step * step);
        hess(i, k) = v;
        hess(k, i) = v;
      }
    }
    return hess;
  };
}

}  // namespace speclab
