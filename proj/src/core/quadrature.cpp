// SPDX-License-Identifier: Apache-2.0
#include "quadrature.hpp"

#include <cmath>

namespace ws {

namespace {

// Gauss-Legendre nodes on [-1,1] by Newton iteration on P_n.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess.
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

Quadrature1D gauss1d(int n) {
  if (n < 1) throw std::invalid_argument("gauss1d: n must be >= 1");
  std::vector<double> x, w;
  legendre_nodes(n, x, w);
  Quadrature1D q;
  q.points.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    q.points[i] = 0.5 * (x[i] + 1.0);
    q.weights[i] = 0.5 * w[i];
  }
  return q;
}

Quadrature1D edge_rule(int exactness_degree) {
  return gauss1d(exactness_degree / 2 + 1);
}

QuadratureRule quadrature_rule(CellType cell, int exactness_degree) {
  if (exactness_degree < 0 || exactness_degree > 20)
    throw std::invalid_argument("quadrature_rule: unsupported exactness degree");
  QuadratureRule rule;
  if (cell == CellType::Rectangle) {
    Quadrature1D g = gauss1d(exactness_degree / 2 + 1);
    for (size_t i = 0; i < g.points.size(); ++i)
      for (size_t j = 0; j < g.points.size(); ++j) {
        rule.points.push_back({g.points[i], g.points[j]});
        rule.weights.push_back(g.weights[i] * g.weights[j]);
      }
    return rule;
  }
  // Triangle via the Duffy map (x, y) = (u, v (1 - u)).  The Jacobian
  // (1 - u) raises the u-degree by one, hence the extra point.
  Quadrature1D gu = gauss1d((exactness_degree + 3) / 2);
  Quadrature1D gv = gauss1d(exactness_degree / 2 + 1);
  for (size_t i = 0; i < gu.points.size(); ++i)
    for (size_t j = 0; j < gv.points.size(); ++j) {
      double u = gu.points[i], v = gv.points[j];
      rule.points.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
    }
  return rule;
}

}  // namespace ws
