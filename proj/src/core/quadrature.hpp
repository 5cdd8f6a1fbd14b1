// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

#include "geometry.hpp"

namespace ws {

enum class CellType { Triangle, Rectangle };

// Quadrature rule on a reference cell: the unit triangle
// {(0,0),(1,0),(0,1)} or the unit square [0,1]^2. Weights carry the
// reference measure (sum = 1/2 resp. 1) and are all positive.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

// Gauss-Legendre rule on [0,1], exact for polynomials of degree 2n-1.
struct Quadrature1D {
  std::vector<double> points;
  std::vector<double> weights;
};

Quadrature1D gauss1d(int n);

// Rule exact (to roundoff) for all polynomials of total degree
// <= exactness_degree. Supported up to degree 20.
QuadratureRule quadrature_rule(CellType cell, int exactness_degree);

// 1D rule on [0,1] exact up to the given degree.
Quadrature1D edge_rule(int exactness_degree);

}  // namespace ws
