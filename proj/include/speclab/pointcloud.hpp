#pragma once

#include <algorithm>
#include <initializer_list>
#include <limits>
#include <vector>

#include "speclab/common.hpp"

namespace speclab {

/** Flat row-major point store; the covering estimators and limit-set sampler
 *  exchange geometry in this shape. */
struct PointCloud {
  int dim = 0;
  std::vector<double> xs;

  std::size_t count() const { return dim > 0 ? xs.size() / static_cast<std::size_t>(dim) : 0; }

  double coord(std::size_t i, int k) const { return xs[i * static_cast<std::size_t>(dim) + k]; }

  void push(std::initializer_list<double> p) {
    require(static_cast<int>(p.size()) == dim, "point dimension mismatch");
    xs.insert(xs.end(), p.begin(), p.end());
  }

  struct Box {
    std::vector<double> lo, hi;
  };

  Box bounding_box() const {
    require(count() > 0, "empty point cloud");
    Box box;
    box.lo.assign(dim, std::numeric_limits<double>::infinity());
    box.hi.assign(dim, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < count(); ++i)
      for (int k = 0; k < dim; ++k) {
        box.lo[k] = std::min(box.lo[k], coord(i, k));
        box.hi[k] = std::max(box.hi[k], coord(i, k));
      }
    return box;
  }

  PointCloud scaled(double s) const {
    PointCloud out = *this;
    for (double& x : out.xs) x *= s;
    return out;
  }
};

}  // namespace speclab
