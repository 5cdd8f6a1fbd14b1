// SPDX-License-Identifier: Apache-2.0
#include "spaces.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ws {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Shifted Legendre polynomial P_n(2s - 1) on [0,1].
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

std::vector<Poly> monomials_pk(int k) {
  std::vector<Poly> out;
  for (int d = 0; d <= k; ++d)
    for (int j = 0; j <= d; ++j) out.push_back(Poly::monomial(d - j, j));
  return out;
}

std::vector<Poly> monomials_qk(int k) {
  std::vector<Poly> out;
  for (int dmax = 0; dmax <= k; ++dmax)
    for (int i = 0; i <= dmax; ++i)
      for (int j = 0; j <= dmax; ++j)
        if (std::max(i, j) == dmax) out.push_back(Poly::monomial(i, j));
  return out;
}

QuadratureRule ref_rule(const Mesh& mesh, int degree) {
  return quadrature_rule(mesh.cell_type, std::min(degree, 20));
}

// L2 Gram of local-frame polys over a physical cell.
MatrixXd poly_gram(const Mesh& mesh, int cell, const std::vector<Poly>& polys,
                   const QuadratureRule& rule, double weight) {
  CellQuad q = cell_quadrature(mesh, cell, rule);
  Frame frame{mesh.centroid(cell), mesh.h_per_cell[cell]};
  int n = static_cast<int>(polys.size());
  MatrixXd vals(n, q.pts.size());
  for (int i = 0; i < n; ++i)
    for (size_t p = 0; p < q.pts.size(); ++p)
      vals(i, p) = polys[i].eval(frame.to_local(q.pts[p]));
  MatrixXd g = MatrixXd::Zero(n, n);
  for (size_t p = 0; p < q.pts.size(); ++p)
    g += weight * q.w[p] * vals.col(p) * vals.col(p).transpose();
  return 0.5 * (g + g.transpose());
}

// Graded modal basis: Cholesky-orthonormalized monomials.  The first
// member is always the normalized constant.
std::vector<Poly> modal_basis(const Mesh& mesh, int cell, std::vector<Poly> monos,
                              const QuadratureRule& rule, double weight) {
  MatrixXd g = poly_gram(mesh, cell, monos, rule, weight);
  Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("modal_basis: Gram matrix not positive definite");
  MatrixXd linv = MatrixXd(llt.matrixL()).inverse();
  int n = static_cast<int>(monos.size());
  std::vector<Poly> basis(n);
  for (int i = 0; i < n; ++i) {
    Poly p;
    for (int j = 0; j <= i; ++j) p += monos[j] * linv(i, j);
    basis[i] = p;
  }
  return basis;
}

// Barycentric coordinates of a triangle as local-frame linear polys.
std::array<Poly, 3> barycentric_polys(const Mesh& mesh, int cell) {
  Frame frame{mesh.centroid(cell), mesh.h_per_cell[cell]};
  Eigen::Matrix3d v;
  for (int i = 0; i < 3; ++i) {
    Vec2 loc = frame.to_local(mesh.vertices[mesh.cells[cell][i]]);
    v(0, i) = 1.0;
    v(1, i) = loc.x;
    v(2, i) = loc.y;
  }
  Eigen::Matrix3d c = v.inverse();
  std::array<Poly, 3> lam;
  for (int i = 0; i < 3; ++i) {
    Poly p(1);
    p.at(0, 0) = c(i, 0);
    p.at(1, 0) = c(i, 1);
    p.at(0, 1) = c(i, 2);
    lam[i] = p;
  }
  return lam;
}

Poly bubble_poly(const Mesh& mesh, int cell) {
  if (mesh.cell_type == CellType::Triangle) {
    auto lam = barycentric_polys(mesh, cell);
    return lam[0] * lam[1] * lam[2];
  }
  // Rectangle: x^(1-x^) y^(1-y^) in the cell's own [0,1]^2 chart.
  Frame frame{mesh.centroid(cell), mesh.h_per_cell[cell]};
  const auto& cv = mesh.cells[cell];
  Vec2 lo = mesh.vertices[cv[0]];
  double w = (mesh.vertices[cv[1]] - lo).norm();
  double ht = (mesh.vertices[cv[3]] - lo).norm();
  // x^ = ((X*s + cx) - lo.x) / w as a local-frame poly, same for y^.
  Poly xh(1), yh(1);
  xh.at(0, 0) = (frame.center.x - lo.x) / w;
  xh.at(1, 0) = frame.scale / w;
  yh.at(0, 0) = (frame.center.y - lo.y) / ht;
  yh.at(0, 1) = frame.scale / ht;
  Poly one = Poly::constant(1.0);
  return xh * (one - xh) * yh * (one - yh);
}

}  // namespace

// --- evaluation helpers ---------------------------------------------------

CellQuad cell_quadrature(const Mesh& mesh, int cell, const QuadratureRule& ref) {
  CellQuad q;
  double jac = mesh.jacobian(cell);
  q.pts.reserve(ref.size());
  q.w.reserve(ref.size());
  for (int i = 0; i < ref.size(); ++i) {
    q.pts.push_back(mesh.map_to_physical(cell, ref.points[i]));
    q.w.push_back(ref.weights[i] * jac);
  }
  return q;
}

MatrixXd eval_values(const CellBasis& cb, int nc, const std::vector<Vec2>& pts) {
  int n = cb.size();
  MatrixXd out(n * nc, pts.size());
  std::vector<Vec2> loc(pts.size());
  for (size_t p = 0; p < pts.size(); ++p) loc[p] = cb.frame.to_local(pts[p]);
  for (int i = 0; i < n * nc; ++i)
    for (size_t p = 0; p < pts.size(); ++p) out(i, p) = cb.funcs[i].eval(loc[p]);
  return out;
}

MatrixXd eval_rowdiv(const CellBasis& cb, int nc, const std::vector<Vec2>& pts) {
  int n = cb.size();
  int rows = nc / 2;  // 4 -> 2 comps, 2 -> 1 comp
  double inv_s = 1.0 / cb.frame.scale;
  MatrixXd out(n * rows, pts.size());
  std::vector<Vec2> loc(pts.size());
  for (size_t p = 0; p < pts.size(); ++p) loc[p] = cb.frame.to_local(pts[p]);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < rows; ++r) {
      Poly d = cb.funcs[i * nc + 2 * r].dx() + cb.funcs[i * nc + 2 * r + 1].dy();
      for (size_t p = 0; p < pts.size(); ++p)
        out(i * rows + r, p) = inv_s * d.eval(loc[p]);
    }
  return out;
}

MatrixXd eval_rowcurl_vec(const CellBasis& cb, const std::vector<Vec2>& pts) {
  int n = cb.size();
  double inv_s = 1.0 / cb.frame.scale;
  MatrixXd out(n * 4, pts.size());
  std::vector<Vec2> loc(pts.size());
  for (size_t p = 0; p < pts.size(); ++p) loc[p] = cb.frame.to_local(pts[p]);
  for (int i = 0; i < n; ++i) {
    PolyMat c = rowcurl(PolyVec{cb.funcs[i * 2], cb.funcs[i * 2 + 1]});
    const Poly* comps[4] = {&c.m00, &c.m01, &c.m10, &c.m11};
    for (int k = 0; k < 4; ++k)
      for (size_t p = 0; p < pts.size(); ++p)
        out(i * 4 + k, p) = inv_s * comps[k]->eval(loc[p]);
  }
  return out;
}

MatrixXd eval_chidivS_vec(const CellBasis& cb, const std::vector<Vec2>& pts) {
  int n = cb.size();
  double inv_s = 1.0 / cb.frame.scale;
  MatrixXd out = MatrixXd::Zero(n * 4, pts.size());
  std::vector<Vec2> loc(pts.size());
  for (size_t p = 0; p < pts.size(); ++p) loc[p] = cb.frame.to_local(pts[p]);
  for (int i = 0; i < n; ++i) {
    // S xi = (xi1, xi2)/2 as one H(div) row; chi(div S xi) is skew.
    Poly d = cb.funcs[i * 2].dx() + cb.funcs[i * 2 + 1].dy();
    for (size_t p = 0; p < pts.size(); ++p) {
      double r = 0.5 * inv_s * d.eval(loc[p]);
      out(i * 4 + 1, p) = r;
      out(i * 4 + 2, p) = -r;
    }
  }
  return out;
}

MatrixXd eval_grad_scalar(const CellBasis& cb, const std::vector<Vec2>& pts) {
  int n = cb.size();
  double inv_s = 1.0 / cb.frame.scale;
  MatrixXd out(n * 2, pts.size());
  std::vector<Vec2> loc(pts.size());
  for (size_t p = 0; p < pts.size(); ++p) loc[p] = cb.frame.to_local(pts[p]);
  for (int i = 0; i < n; ++i) {
    Poly gx = cb.funcs[i].dx(), gy = cb.funcs[i].dy();
    for (size_t p = 0; p < pts.size(); ++p) {
      out(i * 2, p) = inv_s * gx.eval(loc[p]);
      out(i * 2 + 1, p) = inv_s * gy.eval(loc[p]);
    }
  }
  return out;
}

std::vector<double> eval_field(const FieldCoefficients& f, int cell, Vec2 p) {
  const FeSpace& sp = *f.space;
  int nc = sp.nc();
  const CellBasis& cb = sp.cells[cell];
  Vec2 loc = cb.frame.to_local(p);
  std::vector<double> out(nc, 0.0);
  for (int i = 0; i < cb.size(); ++i) {
    double c = f.coef[cb.dofs[i]];
    if (c == 0.0) continue;
    for (int k = 0; k < nc; ++k) out[k] += c * cb.funcs[i * nc + k].eval(loc);
  }
  return out;
}

// --- modal discontinuous spaces -------------------------------------------

FeSpace build_pd_scalar(const Mesh& mesh, int k, double ip_weight) {
  if (k < 0) throw std::invalid_argument("build_pd_scalar: degree must be >= 0");
  FeSpace sp;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Scalar;
  sp.max_degree = k;
  QuadratureRule rule = ref_rule(mesh, 2 * k + 2);
  int nloc = Poly::size(k);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellBasis cb;
    cb.frame = Frame{mesh.centroid(c), mesh.h_per_cell[c]};
    cb.funcs = modal_basis(mesh, c, monomials_pk(k), rule, ip_weight);
    for (int i = 0; i < nloc; ++i) {
      cb.dofs.push_back(sp.dim + i);
      sp.dof_kind.push_back(DofKind::CellMode);
      sp.dof_entity.push_back(c);
    }
    sp.dim += nloc;
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

FeSpace build_qd_scalar(const Mesh& mesh, int k, double ip_weight) {
  if (mesh.cell_type != CellType::Rectangle)
    throw std::invalid_argument("build_qd_scalar: rectangular meshes only");
  FeSpace sp;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Scalar;
  sp.max_degree = 2 * k;
  QuadratureRule rule = ref_rule(mesh, 4 * k + 2);
  int nloc = (k + 1) * (k + 1);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellBasis cb;
    cb.frame = Frame{mesh.centroid(c), mesh.h_per_cell[c]};
    cb.funcs = modal_basis(mesh, c, monomials_qk(k), rule, ip_weight);
    for (int i = 0; i < nloc; ++i) {
      cb.dofs.push_back(sp.dim + i);
      sp.dof_kind.push_back(DofKind::CellMode);
      sp.dof_entity.push_back(c);
    }
    sp.dim += nloc;
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

// --- continuous nodal spaces ----------------------------------------------

namespace {

// Nodal basis from physical node positions by a local Vandermonde solve.
std::vector<Poly> nodal_basis(const Frame& frame, const std::vector<Poly>& span,
                              const std::vector<Vec2>& nodes) {
  int n = static_cast<int>(span.size());
  if (static_cast<int>(nodes.size()) != n)
    throw std::runtime_error("nodal_basis: node/span count mismatch");
  MatrixXd v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = span[j].eval(frame.to_local(nodes[i]));
  MatrixXd vinv = v.inverse();
  std::vector<Poly> basis(n);
  for (int i = 0; i < n; ++i) {
    Poly p;
    for (int j = 0; j < n; ++j) p += span[j] * vinv(j, i);
    basis[i] = p;
  }
  return basis;
}

}  // namespace

FeSpace build_lagrange_tri(const Mesh& mesh, int k) {
  if (mesh.cell_type != CellType::Triangle)
    throw std::invalid_argument("build_lagrange_tri: triangular meshes only");
  if (k < 1 || k > 4)
    throw std::invalid_argument("build_lagrange_tri: degree must be in 1..4");
  FeSpace sp;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Scalar;
  sp.max_degree = k;

  int nv = mesh.num_vertices();
  int ne = mesh.num_edges();
  int per_edge = k - 1;
  int per_cell = (k - 1) * (k - 2) / 2;
  sp.dim = nv + ne * per_edge + mesh.num_cells() * per_cell;
  sp.dof_kind.resize(sp.dim);
  sp.dof_entity.resize(sp.dim);
  for (int v = 0; v < nv; ++v) {
    sp.dof_kind[v] = DofKind::VertexNode;
    sp.dof_entity[v] = v;
  }
  for (int e = 0; e < ne; ++e)
    for (int t = 0; t < per_edge; ++t) {
      sp.dof_kind[nv + e * per_edge + t] = DofKind::EdgeNode;
      sp.dof_entity[nv + e * per_edge + t] = e;
    }
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int t = 0; t < per_cell; ++t) {
      int d = nv + ne * per_edge + c * per_cell + t;
      sp.dof_kind[d] = DofKind::CellMode;
      sp.dof_entity[d] = c;
    }

  std::vector<Poly> span = monomials_pk(k);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellBasis cb;
    cb.frame = Frame{mesh.centroid(c), mesh.h_per_cell[c]};
    std::vector<Vec2> nodes;
    // Vertices.
    for (int i = 0; i < 3; ++i) {
      cb.dofs.push_back(mesh.cells[c][i]);
      nodes.push_back(mesh.vertices[mesh.cells[c][i]]);
    }
    // Edge nodes, ordered along the global low -> high direction so that
    // neighbouring cells agree on node placement.
    for (int le = 0; le < 3; ++le) {
      int e = mesh.cell_edges[c][le];
      Vec2 a = mesh.vertices[mesh.edges[e][0]];
      Vec2 b = mesh.vertices[mesh.edges[e][1]];
      for (int t = 1; t < k; ++t) {
        cb.dofs.push_back(nv + e * per_edge + (t - 1));
        nodes.push_back(a + (b - a) * (static_cast<double>(t) / k));
      }
    }
    // Interior lattice nodes (barycentric, all coordinates >= 1).
    int ctr = 0;
    Vec2 v0 = mesh.vertices[mesh.cells[c][0]];
    Vec2 v1 = mesh.vertices[mesh.cells[c][1]];
    Vec2 v2 = mesh.vertices[mesh.cells[c][2]];
    for (int a = 1; a <= k - 2; ++a)
      for (int b = 1; a + b <= k - 1; ++b) {
        int g = k - a - b;
        if (g < 1) continue;
        cb.dofs.push_back(nv + ne * per_edge + c * per_cell + ctr++);
        nodes.push_back(v0 * (static_cast<double>(g) / k) +
                        v1 * (static_cast<double>(a) / k) +
                        v2 * (static_cast<double>(b) / k));
      }
    cb.funcs = nodal_basis(cb.frame, span, nodes);
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

FeSpace build_q1(const Mesh& mesh) {
  if (mesh.cell_type != CellType::Rectangle)
    throw std::invalid_argument("build_q1: rectangular meshes only");
  FeSpace sp;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Scalar;
  sp.max_degree = 2;
  sp.dim = mesh.num_vertices();
  sp.dof_kind.assign(sp.dim, DofKind::VertexNode);
  sp.dof_entity.resize(sp.dim);
  for (int v = 0; v < sp.dim; ++v) sp.dof_entity[v] = v;
  std::vector<Poly> span = {Poly::monomial(0, 0), Poly::monomial(1, 0),
                            Poly::monomial(0, 1), Poly::monomial(1, 1)};
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellBasis cb;
    cb.frame = Frame{mesh.centroid(c), mesh.h_per_cell[c]};
    std::vector<Vec2> nodes;
    for (int i = 0; i < 4; ++i) {
      cb.dofs.push_back(mesh.cells[c][i]);
      nodes.push_back(mesh.vertices[mesh.cells[c][i]]);
    }
    cb.funcs = nodal_basis(cb.frame, span, nodes);
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

FeSpace build_s2(const Mesh& mesh) {
  if (mesh.cell_type != CellType::Rectangle)
    throw std::invalid_argument("build_s2: rectangular meshes only");
  FeSpace sp;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Scalar;
  sp.max_degree = 3;
  int nv = mesh.num_vertices();
  sp.dim = nv + mesh.num_edges();
  sp.dof_kind.resize(sp.dim);
  sp.dof_entity.resize(sp.dim);
  for (int v = 0; v < nv; ++v) {
    sp.dof_kind[v] = DofKind::VertexNode;
    sp.dof_entity[v] = v;
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    sp.dof_kind[nv + e] = DofKind::EdgeNode;
    sp.dof_entity[nv + e] = e;
  }
  // Standard serendipity span: 4 vertex + 4 edge-midpoint nodes.
  std::vector<Poly> span = {Poly::monomial(0, 0), Poly::monomial(1, 0),
                            Poly::monomial(0, 1), Poly::monomial(1, 1),
                            Poly::monomial(2, 0), Poly::monomial(0, 2),
                            Poly::monomial(2, 1), Poly::monomial(1, 2)};
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellBasis cb;
    cb.frame = Frame{mesh.centroid(c), mesh.h_per_cell[c]};
    std::vector<Vec2> nodes;
    for (int i = 0; i < 4; ++i) {
      cb.dofs.push_back(mesh.cells[c][i]);
      nodes.push_back(mesh.vertices[mesh.cells[c][i]]);
    }
    for (int le = 0; le < 4; ++le) {
      int e = mesh.cell_edges[c][le];
      cb.dofs.push_back(nv + e);
      nodes.push_back((mesh.vertices[mesh.edges[e][0]] +
                       mesh.vertices[mesh.edges[e][1]]) * 0.5);
    }
    cb.funcs = nodal_basis(cb.frame, span, nodes);
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

FeSpace vectorize(const FeSpace& scalar) {
  FeSpace sp;
  sp.mesh = scalar.mesh;
  sp.shape = ValueShape::Vector;
  sp.dim = 2 * scalar.dim;
  sp.max_degree = scalar.max_degree;
  sp.dof_kind.resize(sp.dim);
  sp.dof_entity.resize(sp.dim);
  for (int d = 0; d < scalar.dim; ++d)
    for (int comp = 0; comp < 2; ++comp) {
      sp.dof_kind[2 * d + comp] = scalar.dof_kind[d];
      sp.dof_entity[2 * d + comp] = scalar.dof_entity[d];
    }
  Poly zero;
  for (const auto& scb : scalar.cells) {
    CellBasis cb;
    cb.frame = scb.frame;
    for (int i = 0; i < scb.size(); ++i)
      for (int comp = 0; comp < 2; ++comp) {
        cb.dofs.push_back(2 * scb.dofs[i] + comp);
        cb.funcs.push_back(comp == 0 ? scb.funcs[i] : zero);
        cb.funcs.push_back(comp == 0 ? zero : scb.funcs[i]);
      }
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

FeSpace skewize(const FeSpace& scalar) {
  FeSpace sp;
  sp.mesh = scalar.mesh;
  sp.shape = ValueShape::Skew;
  sp.dim = scalar.dim;
  sp.max_degree = scalar.max_degree;
  sp.dof_kind = scalar.dof_kind;
  sp.dof_entity = scalar.dof_entity;
  Poly zero;
  for (const auto& scb : scalar.cells) {
    CellBasis cb;
    cb.frame = scb.frame;
    cb.dofs = scb.dofs;
    for (int i = 0; i < scb.size(); ++i) {
      cb.funcs.push_back(zero);
      cb.funcs.push_back(scb.funcs[i]);
      cb.funcs.push_back(scb.funcs[i] * (-1.0));
      cb.funcs.push_back(zero);
    }
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

// --- H(div) spaces ---------------------------------------------------------

namespace {

struct HdivLayout {
  std::vector<PolyVec> prime;  // local-frame span of the cell space
  int moments_per_edge = 0;
  int grad_degree = 0;  // paired displacement degree (k - 1)
  bool grad_tensor = false;
};

HdivLayout hdiv_layout(const Mesh& mesh, Family family, int k, int cell) {
  HdivLayout lay;
  switch (family) {
    case Family::BDM: {
      if (mesh.cell_type != CellType::Triangle)
        throw std::invalid_argument("BDM: triangular meshes only");
      if (k < 1) throw std::invalid_argument("BDM: degree must be >= 1");
      for (const Poly& m : monomials_pk(k)) {
        lay.prime.push_back({m, Poly()});
        lay.prime.push_back({Poly(), m});
      }
      lay.moments_per_edge = k + 1;
      break;
    }
    case Family::RTN: {
      if (mesh.cell_type != CellType::Triangle)
        throw std::invalid_argument("RTN: triangular meshes only");
      if (k < 1) throw std::invalid_argument("RTN: degree must be >= 1");
      for (const Poly& m : monomials_pk(k - 1)) {
        lay.prime.push_back({m, Poly()});
        lay.prime.push_back({Poly(), m});
      }
      // x * homogeneous degree k-1 part.
      for (int j = 0; j <= k - 1; ++j) {
        Poly m = Poly::monomial(k - 1 - j, j);
        lay.prime.push_back({Poly::monomial(1, 0) * m, Poly::monomial(0, 1) * m});
      }
      lay.moments_per_edge = k;
      break;
    }
    case Family::rBDM: {
      if (mesh.cell_type != CellType::Rectangle)
        throw std::invalid_argument("rBDM: rectangular meshes only");
      if (k < 1) throw std::invalid_argument("rBDM: degree must be >= 1");
      for (const Poly& m : monomials_pk(k)) {
        lay.prime.push_back({m, Poly()});
        lay.prime.push_back({Poly(), m});
      }
      lay.prime.push_back(curl2(Poly::monomial(k + 1, 1)));
      lay.prime.push_back(curl2(Poly::monomial(1, k + 1)));
      lay.moments_per_edge = k + 1;
      break;
    }
    case Family::rRTN: {
      if (mesh.cell_type != CellType::Rectangle)
        throw std::invalid_argument("rRTN: rectangular meshes only");
      if (k < 1) throw std::invalid_argument("rRTN: degree must be >= 1");
      for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k - 1; ++j) {
          lay.prime.push_back({Poly::monomial(i, j), Poly()});
          lay.prime.push_back({Poly(), Poly::monomial(j, i)});
        }
      lay.moments_per_edge = k;
      lay.grad_tensor = true;
      break;
    }
    default:
      throw std::invalid_argument("hdiv_layout: not an H(div) family");
  }
  lay.grad_degree = k - 1;
  (void)cell;
  return lay;
}

}  // namespace

HdivVectorSpace build_hdiv_vector(const Mesh& mesh, Family family, int k) {
  HdivVectorSpace hv;
  hv.family = family;
  hv.degree = k;

  FeSpace& sp = hv.fe;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Vector;

  HdivLayout lay0 = hdiv_layout(mesh, family, k, 0);
  int nm = lay0.moments_per_edge;
  hv.moments_per_edge = nm;
  int np = static_cast<int>(lay0.prime.size());
  int nper = mesh.edges_per_cell();
  int n_edge_local = nper * nm;
  int n_interior = np - n_edge_local;
  if (n_interior < 0) throw std::runtime_error("build_hdiv_vector: bad layout");

  sp.dim = mesh.num_edges() * nm + mesh.num_cells() * n_interior;
  sp.max_degree = family == Family::rBDM ? k + 1 : k;
  sp.dof_kind.resize(sp.dim);
  sp.dof_entity.resize(sp.dim);
  for (int e = 0; e < mesh.num_edges(); ++e)
    for (int i = 0; i < nm; ++i) {
      sp.dof_kind[e * nm + i] = DofKind::FacetMoment;
      sp.dof_entity[e * nm + i] = e;
    }
  int ioff = mesh.num_edges() * nm;
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int i = 0; i < n_interior; ++i) {
      sp.dof_kind[ioff + c * n_interior + i] = DofKind::InteriorMoment;
      sp.dof_entity[ioff + c * n_interior + i] = c;
    }

  Quadrature1D erule = edge_rule(2 * k + 6);
  QuadratureRule vrule = ref_rule(mesh, 2 * (k + 2) + 2);
  hv.interior_moments.resize(mesh.num_cells());

  for (int c = 0; c < mesh.num_cells(); ++c) {
    HdivLayout lay = hdiv_layout(mesh, family, k, c);
    Frame frame{mesh.centroid(c), mesh.h_per_cell[c]};
    CellQuad q = cell_quadrature(mesh, c, vrule);

    // Group 1: edge normal moments against shifted Legendre polynomials,
    // parametrized along the global (low -> high) edge direction.
    std::vector<int> dofs;
    MatrixXd F(np, np);
    int row = 0;
    for (int le = 0; le < nper; ++le) {
      int e = mesh.cell_edges[c][le];
      Vec2 a = mesh.vertices[mesh.edges[e][0]];
      Vec2 b = mesh.vertices[mesh.edges[e][1]];
      Vec2 n = mesh.edge_normal(e);
      double len = mesh.edge_length(e);
      for (int i = 0; i < nm; ++i) {
        for (int j = 0; j < np; ++j) {
          double acc = 0.0;
          for (size_t g = 0; g < erule.points.size(); ++g) {
            double s = erule.points[g];
            Vec2 p = a + (b - a) * s;
            Vec2 v = lay.prime[j].eval(frame.to_local(p));
            acc += erule.weights[g] * len * legendre_shifted(i, s) * v.dot(n);
          }
          F(row, j) = acc;
        }
        dofs.push_back(e * nm + i);
        ++row;
      }
    }

    // Group 2: moments against gradients of the mean-zero part of the
    // paired displacement space; these make the canonical interpolation
    // commute with the divergence.
    std::vector<Poly> umodal =
        lay.grad_tensor
            ? modal_basis(mesh, c, monomials_qk(lay.grad_degree), vrule, 1.0)
            : modal_basis(mesh, c, monomials_pk(lay.grad_degree), vrule, 1.0);
    std::vector<PolyVec> moment_fields;
    double inv_s = 1.0 / frame.scale;
    for (size_t iu = 1; iu < umodal.size(); ++iu)
      moment_fields.push_back(PolyVec{umodal[iu].dx() * inv_s, umodal[iu].dy() * inv_s});
    int ngrad = static_cast<int>(moment_fields.size());

    auto volume_moment = [&](const PolyVec& w, const PolyVec& v) {
      double acc = 0.0;
      for (size_t g = 0; g < q.pts.size(); ++g) {
        Vec2 loc = frame.to_local(q.pts[g]);
        acc += q.w[g] * (w.x.eval(loc) * v.x.eval(loc) + w.y.eval(loc) * v.y.eval(loc));
      }
      return acc;
    };

    for (int i = 0; i < ngrad; ++i) {
      for (int j = 0; j < np; ++j) F(row, j) = volume_moment(moment_fields[i], lay.prime[j]);
      ++row;
    }

    // Group 3: orthonormalized complement — moments against an L2
    // orthonormal basis of the joint kernel of groups 1 and 2.
    int n_completion = np - row;
    if (n_completion > 0) {
      MatrixXd a12 = F.topRows(row);
      Eigen::JacobiSVD<MatrixXd> svd(a12, Eigen::ComputeFullV);
      double smax = svd.singularValues()(0);
      for (int i = 0; i < row; ++i)
        if (svd.singularValues()(i) < 1e-10 * smax)
          throw std::runtime_error("build_hdiv_vector: dependent dof functionals");
      std::vector<PolyVec> kernel;
      for (int kcol = row; kcol < np; ++kcol) {
        PolyVec g;
        for (int j = 0; j < np; ++j) {
          g.x += lay.prime[j].x * svd.matrixV()(j, kcol);
          g.y += lay.prime[j].y * svd.matrixV()(j, kcol);
        }
        kernel.push_back(g);
      }
      MatrixXd gram(n_completion, n_completion);
      for (int i = 0; i < n_completion; ++i)
        for (int j = 0; j <= i; ++j)
          gram(i, j) = gram(j, i) = volume_moment(kernel[i], kernel[j]);
      Eigen::LLT<MatrixXd> llt(gram);
      MatrixXd linv = MatrixXd(llt.matrixL()).inverse();
      for (int i = 0; i < n_completion; ++i) {
        PolyVec w;
        for (int j = 0; j <= i; ++j) {
          w.x += kernel[j].x * linv(i, j);
          w.y += kernel[j].y * linv(i, j);
        }
        moment_fields.push_back(w);
        for (int j = 0; j < np; ++j) F(row, j) = volume_moment(moment_fields.back(), lay.prime[j]);
        ++row;
      }
    }
    for (int i = 0; i < ngrad + n_completion; ++i)
      dofs.push_back(ioff + c * n_interior + i);

    Eigen::PartialPivLU<MatrixXd> lu(F);
    MatrixXd x = lu.inverse();
    if (!((F * x - MatrixXd::Identity(np, np)).cwiseAbs().maxCoeff() < 1e-6))
      throw std::runtime_error("build_hdiv_vector: dof functional matrix is singular");

    CellBasis cb;
    cb.frame = frame;
    cb.dofs = std::move(dofs);
    cb.funcs.resize(2 * np);
    for (int i = 0; i < np; ++i) {
      PolyVec phi;
      for (int j = 0; j < np; ++j) {
        phi.x += lay.prime[j].x * x(j, i);
        phi.y += lay.prime[j].y * x(j, i);
      }
      cb.funcs[2 * i] = phi.x;
      cb.funcs[2 * i + 1] = phi.y;
    }
    hv.interior_moments[c] = std::move(moment_fields);
    sp.cells.push_back(std::move(cb));
  }
  return hv;
}

// --- bubble Stokes spaces and enrichment -----------------------------------

namespace {

std::vector<std::vector<PolyVec>> xi_fields(const Mesh& mesh, BubbleKind kind, int k) {
  if ((kind == BubbleKind::BHat || kind == BubbleKind::BHatRect || kind == BubbleKind::BFull) && k < 1)
    throw std::invalid_argument("bubble space: k must be >= 1");
  bool rect = kind == BubbleKind::BHatRect;
  if (rect != (mesh.cell_type == CellType::Rectangle))
    throw std::invalid_argument("bubble space: mesh/bubble kind mismatch");
  QuadratureRule rule = ref_rule(mesh, 2 * k + 2);
  std::vector<std::vector<PolyVec>> out(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Frame frame{mesh.centroid(c), mesh.h_per_cell[c]};
    Poly b = bubble_poly(mesh, c);
    double h = mesh.h_per_cell[c];
    double inv_s = 1.0 / frame.scale;
    std::vector<PolyVec>& fields = out[c];
    if (kind == BubbleKind::Peers) {
      fields.push_back({b, Poly()});
      fields.push_back({Poly(), b});
    } else if (kind == BubbleKind::BFull) {
      std::vector<Poly> p = modal_basis(mesh, c, monomials_pk(k - 1), rule, 1.0);
      for (const Poly& m : p) {
        fields.push_back({b * m, Poly()});
        fields.push_back({Poly(), b * m});
      }
    } else {
      // B^_k: h_T^{-2} b_T rot eta for eta = chi(r), r in the mean-zero part
      // of P_k(T). Row-wise rot of the skew matrix chi(r) is -grad r, so the
      // generating fields are bubble-weighted gradients; the pairing
      // (skw curl xi, chi(q)) = (q, div xi) then reduces by parts to the
      // negative definite form -(b_T grad r, grad q).
      std::vector<Poly> r = modal_basis(mesh, c, monomials_pk(k), rule, 2.0);
      for (size_t i = 1; i < r.size(); ++i) {
        fields.push_back(
            {b * r[i].dx() * (inv_s / (h * h)), b * r[i].dy() * (inv_s / (h * h))});
      }
    }
  }
  return out;
}

}  // namespace

FeSpace build_bubble_xi(const Mesh& mesh, BubbleKind kind, int k) {
  auto fields = xi_fields(mesh, kind, k);
  FeSpace sp;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Vector;
  sp.max_degree = (mesh.cell_type == CellType::Triangle ? 3 : 4) + std::max(0, k - 1);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellBasis cb;
    cb.frame = Frame{mesh.centroid(c), mesh.h_per_cell[c]};
    for (const auto& f : fields[c]) {
      cb.dofs.push_back(sp.dim++);
      cb.funcs.push_back(f.x);
      cb.funcs.push_back(f.y);
      sp.dof_kind.push_back(DofKind::CellMode);
      sp.dof_entity.push_back(c);
    }
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

FeSpace build_curl_bubble_image(const Mesh& mesh, BubbleKind kind, int k) {
  auto fields = xi_fields(mesh, kind, k);
  FeSpace sp;
  sp.mesh = &mesh;
  sp.shape = ValueShape::Matrix;
  sp.max_degree = (mesh.cell_type == CellType::Triangle ? 2 : 3) + std::max(0, k - 1);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellBasis cb;
    cb.frame = Frame{mesh.centroid(c), mesh.h_per_cell[c]};
    double inv_s = 1.0 / cb.frame.scale;
    for (const auto& f : fields[c]) {
      PolyMat m = rowcurl(f);
      cb.dofs.push_back(sp.dim++);
      cb.funcs.push_back(m.m00 * inv_s);
      cb.funcs.push_back(m.m01 * inv_s);
      cb.funcs.push_back(m.m10 * inv_s);
      cb.funcs.push_back(m.m11 * inv_s);
      sp.dof_kind.push_back(DofKind::Enrichment);
      sp.dof_entity.push_back(c);
    }
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

namespace {

SigmaSpace matrixize_rows(HdivVectorSpace hv) {
  SigmaSpace sig;
  const FeSpace& v = hv.fe;
  FeSpace& sp = sig.fe;
  sp.mesh = v.mesh;
  sp.shape = ValueShape::Matrix;
  sp.dim = 2 * v.dim;
  sp.max_degree = v.max_degree;
  sig.base_dim = sp.dim;
  sp.dof_kind.resize(sp.dim);
  sp.dof_entity.resize(sp.dim);
  for (int r = 0; r < 2; ++r)
    for (int d = 0; d < v.dim; ++d) {
      sp.dof_kind[r * v.dim + d] = v.dof_kind[d];
      sp.dof_entity[r * v.dim + d] = v.dof_entity[d];
    }
  Poly zero;
  for (const auto& vcb : v.cells) {
    CellBasis cb;
    cb.frame = vcb.frame;
    for (int r = 0; r < 2; ++r)
      for (int i = 0; i < vcb.size(); ++i) {
        cb.dofs.push_back(r * v.dim + vcb.dofs[i]);
        if (r == 0) {
          cb.funcs.push_back(vcb.funcs[2 * i]);
          cb.funcs.push_back(vcb.funcs[2 * i + 1]);
          cb.funcs.push_back(zero);
          cb.funcs.push_back(zero);
        } else {
          cb.funcs.push_back(zero);
          cb.funcs.push_back(zero);
          cb.funcs.push_back(vcb.funcs[2 * i]);
          cb.funcs.push_back(vcb.funcs[2 * i + 1]);
        }
      }
    sp.cells.push_back(std::move(cb));
  }
  sig.enrich_range.assign(v.mesh->num_cells(), {0, 0});
  sig.vec = std::move(hv);
  return sig;
}

}  // namespace

SigmaSpace build_sigma(const Mesh& mesh, Family family, int k) {
  return matrixize_rows(build_hdiv_vector(mesh, family, k));
}

SigmaSpace build_sigma_enriched(const Mesh& mesh, Family family, int k,
                                BubbleKind kind, int bubble_k) {
  SigmaSpace sig = build_sigma(mesh, family, k);
  FeSpace image = build_curl_bubble_image(mesh, kind, bubble_k);
  FeSpace& sp = sig.fe;
  int deg = std::max(sp.max_degree, image.max_degree);
  QuadratureRule rule = ref_rule(mesh, 2 * deg + 2);

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis& ec = image.cells[c];
    int ne = ec.size();
    int begin = sp.dim;
    if (ne == 0) {
      sig.enrich_range[c] = {begin, begin};
      continue;
    }
    CellQuad q = cell_quadrature(mesh, c, rule);
    // Remove the cell-wise linear dependence of the enrichment on the
    // base local space by a rank-revealing orthogonalization.
    MatrixXd evals = eval_values(ec, 4, q.pts);
    const CellBasis& bc = sp.cells[c];
    int nb = bc.size();
    MatrixXd bvals = eval_values(bc, 4, q.pts);
    VectorXd w = Eigen::Map<const VectorXd>(q.w.data(), q.w.size());
    MatrixXd wq = w.asDiagonal();

    // L2 norms per enrichment field; normalize first.
    std::vector<double> nrm(ne);
    for (int i = 0; i < ne; ++i) {
      double acc = 0.0;
      for (size_t g = 0; g < q.pts.size(); ++g)
        for (int comp = 0; comp < 4; ++comp)
          acc += q.w[g] * evals(i * 4 + comp, g) * evals(i * 4 + comp, g);
      nrm[i] = std::sqrt(acc);
    }
    auto block_ip = [&](const MatrixXd& a, int ia, const MatrixXd& b, int ib) {
      double acc = 0.0;
      for (size_t g = 0; g < q.pts.size(); ++g)
        for (int comp = 0; comp < 4; ++comp)
          acc += q.w[g] * a(ia * 4 + comp, g) * b(ib * 4 + comp, g);
      return acc;
    };
    MatrixXd mee(ne, ne), mbe(nb, ne), mbb(nb, nb);
    for (int i = 0; i < ne; ++i)
      for (int j = 0; j <= i; ++j)
        mee(i, j) = mee(j, i) = block_ip(evals, i, evals, j) / (nrm[i] * nrm[j]);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < ne; ++j) mbe(i, j) = block_ip(bvals, i, evals, j) / nrm[j];
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j <= i; ++j) mbb(i, j) = mbb(j, i) = block_ip(bvals, i, bvals, j);

    MatrixXd resid = mee - mbe.transpose() * Eigen::LDLT<MatrixXd>(mbb).solve(mbe);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(resid);
    CellBasis& cb = sp.cells[c];
    for (int i = ne - 1; i >= 0; --i) {  // descending eigenvalues
      if (es.eigenvalues()(i) <= 1e-10) break;
      VectorXd v = es.eigenvectors().col(i);
      PolyMat f;
      for (int j = 0; j < ne; ++j) {
        double cfac = v(j) / nrm[j];
        f.m00 += ec.funcs[j * 4 + 0] * cfac;
        f.m01 += ec.funcs[j * 4 + 1] * cfac;
        f.m10 += ec.funcs[j * 4 + 2] * cfac;
        f.m11 += ec.funcs[j * 4 + 3] * cfac;
      }
      double fn = 0.0;
      for (size_t g = 0; g < q.pts.size(); ++g) {
        Mat2 m = f.eval(cb.frame.to_local(q.pts[g]));
        fn += q.w[g] * m.ddot(m);
      }
      fn = std::sqrt(fn);
      cb.dofs.push_back(sp.dim);
      cb.funcs.push_back(f.m00 * (1.0 / fn));
      cb.funcs.push_back(f.m01 * (1.0 / fn));
      cb.funcs.push_back(f.m10 * (1.0 / fn));
      cb.funcs.push_back(f.m11 * (1.0 / fn));
      sp.dof_kind.push_back(DofKind::Enrichment);
      sp.dof_entity.push_back(c);
      ++sp.dim;
    }
    sig.enrich_range[c] = {begin, sp.dim};
  }
  sig.fe.max_degree = deg;
  return sig;
}

FeSpace build_space(const Mesh& mesh, const SpaceDescriptor& d) {
  auto shaped = [&](FeSpace scalar) -> FeSpace {
    switch (d.shape) {
      case ValueShape::Scalar: return scalar;
      case ValueShape::Vector: return vectorize(scalar);
      case ValueShape::Skew: return skewize(scalar);
      default:
        throw std::invalid_argument("build_space: matrix shape requires an H(div) family");
    }
  };
  switch (d.family) {
    case Family::Pd:
      return shaped(build_pd_scalar(mesh, d.degree, d.shape == ValueShape::Skew ? 2.0 : 1.0));
    case Family::Qd:
      return shaped(build_qd_scalar(mesh, d.degree, d.shape == ValueShape::Skew ? 2.0 : 1.0));
    case Family::Pc:
      return shaped(build_lagrange_tri(mesh, d.degree));
    case Family::Qc:
      if (d.degree != 1) throw std::invalid_argument("build_space: only Q_1^c is supported");
      return shaped(build_q1(mesh));
    case Family::S2c:
      return shaped(build_s2(mesh));
    case Family::BubbleVec:
      return build_bubble_xi(mesh, BubbleKind::BFull, d.degree);
    case Family::CurlBubbleHat:
      return build_bubble_xi(mesh, BubbleKind::BHat, d.degree);
    case Family::CurlBubbleHatRect:
      return build_bubble_xi(mesh, BubbleKind::BHatRect, d.degree);
    case Family::BDM:
    case Family::RTN:
    case Family::rBDM:
    case Family::rRTN: {
      if (d.shape == ValueShape::Vector) return build_hdiv_vector(mesh, d.family, d.degree).fe;
      if (d.shape == ValueShape::Matrix) return build_sigma(mesh, d.family, d.degree).fe;
      throw std::invalid_argument("build_space: H(div) families are vector or matrix valued");
    }
  }
  throw std::invalid_argument("build_space: unknown family");
}

// --- element triples --------------------------------------------------------

namespace {

FeSpace merge_vector_spaces(const FeSpace& a, const FeSpace& b) {
  FeSpace sp;
  sp.mesh = a.mesh;
  sp.shape = ValueShape::Vector;
  sp.dim = a.dim + b.dim;
  sp.max_degree = std::max(a.max_degree, b.max_degree);
  sp.dof_kind = a.dof_kind;
  sp.dof_entity = a.dof_entity;
  sp.dof_kind.insert(sp.dof_kind.end(), b.dof_kind.begin(), b.dof_kind.end());
  sp.dof_entity.insert(sp.dof_entity.end(), b.dof_entity.begin(), b.dof_entity.end());
  for (int c = 0; c < a.mesh->num_cells(); ++c) {
    CellBasis cb = a.cells[c];
    for (int i = 0; i < b.cells[c].size(); ++i) {
      cb.dofs.push_back(a.dim + b.cells[c].dofs[i]);
      cb.funcs.push_back(b.cells[c].funcs[2 * i]);
      cb.funcs.push_back(b.cells[c].funcs[2 * i + 1]);
    }
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

// Continuous piecewise polynomials on a barycentric mesh vanishing on
// macro-cell boundaries: keep only dofs at barycenters, on spoke edges,
// and in cell interiors.
FeSpace restrict_macro_interior(const FeSpace& lag, const Mesh& mesh) {
  if (!mesh.is_barycentric())
    throw std::invalid_argument("restrict_macro_interior: requires a barycentric mesh");
  std::vector<int> remap(lag.dim, -1);
  FeSpace sp;
  sp.mesh = lag.mesh;
  sp.shape = lag.shape;
  sp.max_degree = lag.max_degree;
  for (int d = 0; d < lag.dim; ++d) {
    bool keep = true;
    if (lag.dof_kind[d] == DofKind::VertexNode)
      keep = lag.dof_entity[d] >= mesh.macro_vertex_count;
    else if (lag.dof_kind[d] == DofKind::EdgeNode) {
      const auto& e = mesh.edges[lag.dof_entity[d]];
      keep = !(e[0] < mesh.macro_vertex_count && e[1] < mesh.macro_vertex_count);
    }
    if (keep) {
      remap[d] = sp.dim++;
      sp.dof_kind.push_back(lag.dof_kind[d]);
      sp.dof_entity.push_back(lag.dof_entity[d]);
    }
  }
  for (const auto& lcb : lag.cells) {
    CellBasis cb;
    cb.frame = lcb.frame;
    for (int i = 0; i < lcb.size(); ++i) {
      int nd = remap[lcb.dofs[i]];
      if (nd < 0) continue;
      cb.dofs.push_back(nd);
      cb.funcs.push_back(lcb.funcs[i]);
    }
    sp.cells.push_back(std::move(cb));
  }
  return sp;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

const std::vector<std::string>& triple_catalogue() {
  static const std::vector<std::string> names = {
      "PEERS", "THB", "Rect2D", "AFW", "CGG", "GG", "Stenberg",
      "BaryBDM", "AwanouLow", "rGG"};
  return names;
}

ElementTriple make_triple(const std::string& name, int k, const Mesh& mesh) {
  ElementTriple t;
  t.name = name;
  t.k = k;
  t.mesh = &mesh;
  bool tri = mesh.cell_type == CellType::Triangle;
  double kd = k;

  if (name == "PEERS") {
    require(tri, "PEERS: triangular meshes only");
    require(k == 1, "PEERS: fixed order k = 1");
    t.sigma = build_sigma_enriched(mesh, Family::RTN, 1, BubbleKind::Peers, 1);
    t.displacement = vectorize(build_pd_scalar(mesh, 0));
    t.rotation = skewize(build_lagrange_tri(mesh, 1));
    t.gamma0 = Gamma0Kind::None;
    t.stokes = merge_vector_spaces(vectorize(build_lagrange_tri(mesh, 1)),
                                   build_bubble_xi(mesh, BubbleKind::Peers, 1));
    t.target_rates = {1, 1, 1};
  } else if (name == "THB") {
    require(tri, "THB: triangular meshes only");
    require(k >= 1 && k <= 3, "THB: k must be in 1..3");
    t.sigma = build_sigma(mesh, Family::BDM, k);
    t.displacement = vectorize(build_pd_scalar(mesh, k - 1));
    t.rotation = skewize(build_lagrange_tri(mesh, k));
    t.gamma0 = Gamma0Kind::None;
    t.stokes = vectorize(build_lagrange_tri(mesh, k + 1));
    t.target_rates = {kd, kd, kd};
  } else if (name == "Rect2D") {
    require(mesh.cell_type == CellType::Rectangle, "Rect2D: rectangular meshes only");
    require(k == 1, "Rect2D: fixed order k = 1");
    t.sigma = build_sigma(mesh, Family::rBDM, 1);
    t.displacement = vectorize(build_pd_scalar(mesh, 0));
    t.rotation = skewize(build_q1(mesh));
    t.gamma0 = Gamma0Kind::None;
    t.stokes = vectorize(build_s2(mesh));
    t.target_rates = {2, 2, 2};
  } else if (name == "AFW") {
    require(tri, "AFW: triangular meshes only");
    require(k >= 1, "AFW: k must be >= 1");
    t.sigma = build_sigma(mesh, Family::BDM, k);
    t.displacement = vectorize(build_pd_scalar(mesh, k - 1));
    t.rotation = skewize(build_pd_scalar(mesh, k - 1, 2.0));
    t.gamma0 = Gamma0Kind::CellConstant;
    if (k >= 2) t.stokes = build_bubble_xi(mesh, BubbleKind::BHat, k - 1);
    t.target_rates = {kd, kd, kd};
  } else if (name == "CGG") {
    require(tri, "CGG: triangular meshes only");
    require(k >= 2, "CGG: k must be >= 2");
    t.sigma = build_sigma_enriched(mesh, Family::RTN, k, BubbleKind::BHat, k - 1);
    t.displacement = vectorize(build_pd_scalar(mesh, k - 1));
    t.rotation = skewize(build_pd_scalar(mesh, k - 1, 2.0));
    t.gamma0 = Gamma0Kind::CellConstant;
    t.stokes = build_bubble_xi(mesh, BubbleKind::BHat, k - 1);
    t.target_rates = {kd, kd, kd};
  } else if (name == "GG") {
    require(tri, "GG: triangular meshes only");
    require(k >= 1, "GG: k must be >= 1");
    t.sigma = build_sigma_enriched(mesh, Family::BDM, k, BubbleKind::BHat, k);
    t.displacement = vectorize(build_pd_scalar(mesh, k - 1));
    t.rotation = skewize(build_pd_scalar(mesh, k, 2.0));
    t.gamma0 = Gamma0Kind::CellConstant;
    t.stokes = build_bubble_xi(mesh, BubbleKind::BHat, k);
    t.target_rates = {kd, kd, kd};
  } else if (name == "Stenberg") {
    require(tri, "Stenberg: triangular meshes only");
    require(k >= 1, "Stenberg: k must be >= 1");
    t.sigma = build_sigma_enriched(mesh, Family::BDM, k, BubbleKind::BFull, k);
    t.displacement = vectorize(build_pd_scalar(mesh, k - 1));
    t.rotation = skewize(build_pd_scalar(mesh, k, 2.0));
    t.gamma0 = Gamma0Kind::CellConstant;
    t.stokes = build_bubble_xi(mesh, BubbleKind::BFull, k);
    t.target_rates = {kd, kd, kd};
  } else if (name == "BaryBDM") {
    require(tri, "BaryBDM: triangular meshes only");
    require(mesh.is_barycentric(), "BaryBDM: requires a barycentric mesh");
    require(k >= 1 && k <= 3, "BaryBDM: k must be in 1..3");
    t.sigma = build_sigma(mesh, Family::BDM, k);
    t.displacement = vectorize(build_pd_scalar(mesh, k - 1));
    t.rotation = skewize(build_pd_scalar(mesh, k, 2.0));
    t.gamma0 = Gamma0Kind::MacroConstant;
    t.stokes = vectorize(restrict_macro_interior(build_lagrange_tri(mesh, k + 1), mesh));
    t.target_rates = {kd, kd, kd};
  } else if (name == "AwanouLow") {
    require(mesh.cell_type == CellType::Rectangle, "AwanouLow: rectangular meshes only");
    require(k == 1, "AwanouLow: fixed order k = 1");
    t.sigma = build_sigma(mesh, Family::rBDM, 1);
    t.displacement = vectorize(build_pd_scalar(mesh, 0));
    t.rotation = skewize(build_pd_scalar(mesh, 0, 2.0));
    t.gamma0 = Gamma0Kind::CellConstant;
    t.target_rates = {1, 1, 1};
  } else if (name == "rGG") {
    require(mesh.cell_type == CellType::Rectangle, "rGG: rectangular meshes only");
    require(k >= 1, "rGG: k must be >= 1");
    t.sigma = build_sigma_enriched(mesh, Family::rBDM, k, BubbleKind::BHatRect, k);
    t.displacement = vectorize(build_pd_scalar(mesh, k - 1));
    t.rotation = skewize(build_pd_scalar(mesh, k, 2.0));
    t.gamma0 = Gamma0Kind::CellConstant;
    t.stokes = build_bubble_xi(mesh, BubbleKind::BHatRect, k);
    t.target_rates = {kd, kd, kd};
  } else if (name == "UNSTABLE_PROBE") {
    // Known-unstable pair used to prove the detector can fail an element:
    // the skew multiplier space is too rich for BDM_1.
    require(tri, "UNSTABLE_PROBE: triangular meshes only");
    t.sigma = build_sigma(mesh, Family::BDM, 1);
    t.displacement = vectorize(build_pd_scalar(mesh, 0));
    t.rotation = skewize(build_pd_scalar(mesh, 1, 2.0));
    t.gamma0 = Gamma0Kind::CellConstant;
    t.stokes = build_bubble_xi(mesh, BubbleKind::BHat, 1);
    t.target_rates = {1, 1, 1};
  } else {
    throw std::invalid_argument("make_triple: unknown triple '" + name + "'");
  }
  return t;
}

std::pair<MatrixXd, MatrixXd> gamma_split(const ElementTriple& t) {
  const FeSpace& g = t.rotation;
  int n = g.dim;
  if (t.gamma0 == Gamma0Kind::None)
    return {MatrixXd::Zero(n, 0), MatrixXd::Identity(n, n)};

  const Mesh& mesh = *t.mesh;
  if (t.gamma0 == Gamma0Kind::CellConstant) {
    // Modal cell bases are graded and orthonormal: mode 0 is the constant.
    std::vector<int> g0;
    std::vector<char> is0(n, 0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      int d = g.cells[c].dofs[0];
      g0.push_back(d);
      is0[d] = 1;
    }
    MatrixXd m0 = MatrixXd::Zero(n, static_cast<int>(g0.size()));
    for (size_t i = 0; i < g0.size(); ++i) m0(g0[i], static_cast<int>(i)) = 1.0;
    MatrixXd m1 = MatrixXd::Zero(n, n - static_cast<int>(g0.size()));
    int col = 0;
    for (int d = 0; d < n; ++d)
      if (!is0[d]) m1(d, col++) = 1.0;
    return {m0, m1};
  }

  // Macro-cell-wise constants on a barycentric mesh.
  std::map<int, std::vector<int>> macro_children;
  for (int c = 0; c < mesh.num_cells(); ++c)
    macro_children[mesh.parent_map[c]].push_back(c);
  int nmacro = static_cast<int>(macro_children.size());
  MatrixXd m0 = MatrixXd::Zero(n, nmacro);
  MatrixXd m1 = MatrixXd::Zero(n, n - nmacro);
  int col0 = 0, col1 = 0;
  for (const auto& [macro, children] : macro_children) {
    (void)macro;
    // Coefficients of the macro-constant in the orthonormal modal basis:
    // sqrt(2 |T_c|) on each child's constant mode.
    Eigen::VectorXd v(children.size());
    std::vector<int> slots;
    for (size_t i = 0; i < children.size(); ++i) {
      int c = children[i];
      slots.push_back(g.cells[c].dofs[0]);
      v(static_cast<int>(i)) = std::sqrt(2.0 * mesh.area(c));
    }
    v.normalize();
    for (size_t i = 0; i < slots.size(); ++i) m0(slots[i], col0) = v(static_cast<int>(i));
    ++col0;
    // Orthonormal complement of v within the constant-mode slots.
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(v.size(), v.size());
    Eigen::MatrixXd proj = basis - v * v.transpose();
    Eigen::JacobiSVD<MatrixXd> svd(proj, Eigen::ComputeFullU);
    for (int i = 0; i < static_cast<int>(children.size()) - 1; ++i) {
      for (size_t s = 0; s < slots.size(); ++s)
        m1(slots[s], col1) = svd.matrixU()(static_cast<int>(s), i);
      ++col1;
    }
    for (size_t i = 0; i < children.size(); ++i) {
      int c = children[i];
      for (int j = 1; j < g.cells[c].size(); ++j)
        m1(g.cells[c].dofs[j], col1++) = 1.0;
    }
  }
  return {m0, m1};
}

std::string space_dims_json(const ElementTriple& t) {
  nlohmann::json j;
  j["name"] = t.name;
  j["k"] = t.k;
  j["cells"] = t.mesh->num_cells();
  j["sigma_dim"] = t.sigma.fe.dim;
  j["sigma_base_dim"] = t.sigma.base_dim;
  j["sigma_enrichment_dim"] = t.sigma.fe.dim - t.sigma.base_dim;
  j["u_dim"] = t.displacement.dim;
  j["gamma_dim"] = t.rotation.dim;
  j["xi_dim"] = t.stokes.dim;
  j["total_dim"] = t.sigma.fe.dim + t.displacement.dim + t.rotation.dim;
  return j.dump(2);
}

}  // namespace ws
