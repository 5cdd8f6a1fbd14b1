// SPDX-License-Identifier: Apache-2.0
#include "operators.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>

namespace ws {

namespace {

double legendre_shifted(int n, double s) {
  double t = 2.0 * s - 1.0;
  double p0 = 1.0, p1 = t;
  if (n == 0) return p0;
  if (n == 1) return p1;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace

FieldCoefficients l2_project(const FeSpace& space, const FieldFn& f, int quad_degree) {
  const Mesh& mesh = *space.mesh;
  int nc = space.nc();
  QuadratureRule rule =
      quadrature_rule(mesh.cell_type, std::min(20, std::max(quad_degree, 2 * space.max_degree)));
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.dim);
  std::vector<double> fv(nc);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis& cb = space.cells[c];
    CellQuad q = cell_quadrature(mesh, c, rule);
    Eigen::MatrixXd vals = eval_values(cb, nc, q.pts);
    int n = cb.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (size_t g = 0; g < q.pts.size(); ++g) {
      f(q.pts[g], fv.data());
      for (int i = 0; i < n; ++i) {
        double fi = 0.0;
        for (int k = 0; k < nc; ++k) fi += vals(i * nc + k, g) * fv[k];
        r(i) += q.w[g] * fi;
        for (int j = 0; j <= i; ++j) {
          double mij = 0.0;
          for (int k = 0; k < nc; ++k) mij += vals(i * nc + k, g) * vals(j * nc + k, g);
          m(i, j) += q.w[g] * mij;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      rhs(cb.dofs[i]) += r(i);
      for (int j = 0; j <= i; ++j) {
        trips.emplace_back(cb.dofs[i], cb.dofs[j], m(i, j));
        if (i != j) trips.emplace_back(cb.dofs[j], cb.dofs[i], m(i, j));
      }
    }
  }
  Eigen::SparseMatrix<double> mass(space.dim, space.dim);
  mass.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(mass);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("l2_project: mass matrix factorization failed");
  FieldCoefficients out;
  out.space = &space;
  out.coef = llt.solve(rhs);
  return out;
}

FieldCoefficients interpolate_hdiv(const HdivVectorSpace& hv, const FieldFn& vec_f) {
  const FeSpace& sp = hv.fe;
  const Mesh& mesh = *sp.mesh;
  FieldCoefficients out;
  out.space = &sp;
  out.coef = Eigen::VectorXd::Zero(sp.dim);

  int nm = hv.moments_per_edge;
  Quadrature1D erule = gauss1d(12);
  double fv[2];
  for (int e = 0; e < mesh.num_edges(); ++e) {
    Vec2 a = mesh.vertices[mesh.edges[e][0]];
    Vec2 b = mesh.vertices[mesh.edges[e][1]];
    Vec2 n = mesh.edge_normal(e);
    double len = mesh.edge_length(e);
    for (size_t g = 0; g < erule.points.size(); ++g) {
      double s = erule.points[g];
      vec_f(a + (b - a) * s, fv);
      double vn = fv[0] * n.x + fv[1] * n.y;
      for (int i = 0; i < nm; ++i)
        out.coef(e * nm + i) += erule.weights[g] * len * legendre_shifted(i, s) * vn;
    }
  }

  int ioff = mesh.num_edges() * nm;
  QuadratureRule vrule = quadrature_rule(mesh.cell_type, 18);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& moments = hv.interior_moments[c];
    if (moments.empty()) continue;
    int ni = static_cast<int>(moments.size());
    Frame frame{mesh.centroid(c), mesh.h_per_cell[c]};
    CellQuad q = cell_quadrature(mesh, c, vrule);
    for (size_t g = 0; g < q.pts.size(); ++g) {
      vec_f(q.pts[g], fv);
      Vec2 loc = frame.to_local(q.pts[g]);
      for (int i = 0; i < ni; ++i)
        out.coef(ioff + c * ni + i) +=
            q.w[g] * (moments[i].x.eval(loc) * fv[0] + moments[i].y.eval(loc) * fv[1]);
    }
  }
  return out;
}

FieldCoefficients interpolate_sigma(const SigmaSpace& sigma, const FieldFn& mat_f) {
  FieldCoefficients out;
  out.space = &sigma.fe;
  out.coef = Eigen::VectorXd::Zero(sigma.fe.dim);
  for (int r = 0; r < 2; ++r) {
    FieldFn row = [&mat_f, r](Vec2 p, double* v) {
      double m[4];
      mat_f(p, m);
      v[0] = m[2 * r];
      v[1] = m[2 * r + 1];
    };
    FieldCoefficients rc = interpolate_hdiv(sigma.vec, row);
    out.coef.segment(r * sigma.vec.fe.dim, sigma.vec.fe.dim) = rc.coef;
  }
  return out;
}

IdentityResidual discrete_identity_residual(const ElementTriple& triple) {
  IdentityResidual res;
  const FeSpace& xi = triple.stokes;
  const FeSpace& gamma = triple.rotation;
  if (xi.dim == 0) return res;
  const Mesh& mesh = *xi.mesh;
  int deg = std::min(20, 2 * std::max(xi.max_degree, gamma.max_degree));
  QuadratureRule rule = quadrature_rule(mesh.cell_type, deg);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis& xc = xi.cells[c];
    const CellBasis& gc = gamma.cells[c];
    if (xc.size() == 0) continue;
    CellQuad q = cell_quadrature(mesh, c, rule);
    Eigen::MatrixXd curls = eval_rowcurl_vec(xc, q.pts);
    Eigen::MatrixXd chis = eval_chidivS_vec(xc, q.pts);
    Eigen::MatrixXd gvals = eval_values(gc, 4, q.pts);
    double cmax = std::max(1.0, curls.cwiseAbs().maxCoeff());
    for (int i = 0; i < xc.size(); ++i) {
      // skw(curl xi) components from the raw curl.
      for (size_t g = 0; g < q.pts.size(); ++g) {
        double r = 0.5 * (curls(i * 4 + 1, g) - curls(i * 4 + 2, g));
        double d = std::max({std::abs(r - chis(i * 4 + 1, g)),
                             std::abs(-r - chis(i * 4 + 2, g))});
        res.pointwise = std::max(res.pointwise, d / cmax);
      }
      for (int j = 0; j < gc.size(); ++j) {
        double acc = 0.0, gn = 0.0, xn = 0.0;
        for (size_t g = 0; g < q.pts.size(); ++g) {
          double r = 0.5 * (curls(i * 4 + 1, g) - curls(i * 4 + 2, g));
          double skw[4] = {0.0, r, -r, 0.0};
          for (int k = 0; k < 4; ++k) {
            acc += q.w[g] * (skw[k] - chis(i * 4 + k, g)) * gvals(j * 4 + k, g);
            gn += q.w[g] * gvals(j * 4 + k, g) * gvals(j * 4 + k, g);
            xn += q.w[g] * skw[k] * skw[k];
          }
        }
        res.projected = std::max(res.projected,
                                 std::abs(acc) / (1e-30 + std::sqrt(gn) * std::sqrt(xn)));
      }
    }
  }
  return res;
}

}  // namespace ws
