// SPDX-License-Identifier: Apache-2.0
#include "assembly.hpp"

#include <Eigen/SparseLU>
#include <stdexcept>

namespace ws {

Mat2 compliance_apply(const Material& mat, const Mat2& tau) {
  Mat2 s = sym_part(tau);
  Mat2 w = skw_part(tau);
  double fac = mat.lambda / (2.0 * mat.mu + 2.0 * mat.lambda);
  double tr = s.trace();
  Mat2 out;
  for (int i = 0; i < 4; ++i) out.a[i] = s.a[i] / (2.0 * mat.mu) + w.a[i];
  out.a[0] -= fac * tr / (2.0 * mat.mu);
  out.a[3] -= fac * tr / (2.0 * mat.mu);
  return out;
}

namespace {

Eigen::MatrixXd eval_op(const CellBasis& cb, int nc, EvalOp op, const std::vector<Vec2>& pts) {
  switch (op) {
    case EvalOp::Value: return eval_values(cb, nc, pts);
    case EvalOp::RowDiv: return eval_rowdiv(cb, nc, pts);
    case EvalOp::RowCurl: return eval_rowcurl_vec(cb, pts);
    case EvalOp::ChiDivS: return eval_chidivS_vec(cb, pts);
  }
  throw std::invalid_argument("eval_op: unknown operator");
}

int op_components(ValueShape shape, EvalOp op) {
  int nc = value_components(shape);
  switch (op) {
    case EvalOp::Value: return nc;
    case EvalOp::RowDiv: return nc / 2;
    case EvalOp::RowCurl:
    case EvalOp::ChiDivS:
      if (shape != ValueShape::Vector)
        throw std::invalid_argument("curl/chi-div-S need a vector space");
      return 4;
  }
  throw std::invalid_argument("op_components: unknown operator");
}

}  // namespace

SpMat assemble_pairing(const FeSpace& test, EvalOp op_test, const FeSpace& trial,
                       EvalOp op_trial, int quad_degree) {
  if (test.mesh != trial.mesh)
    throw std::invalid_argument("assemble_pairing: spaces live on different meshes");
  int ct = op_components(test.shape, op_test);
  int cu = op_components(trial.shape, op_trial);
  if (ct != cu) throw std::invalid_argument("assemble_pairing: component mismatch");
  const Mesh& mesh = *test.mesh;
  if (quad_degree < 0) quad_degree = test.max_degree + trial.max_degree + 2;
  QuadratureRule rule = quadrature_rule(mesh.cell_type, std::min(20, quad_degree));

  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis& tc = test.cells[c];
    const CellBasis& uc = trial.cells[c];
    if (tc.size() == 0 || uc.size() == 0) continue;
    CellQuad q = cell_quadrature(mesh, c, rule);
    Eigen::MatrixXd tv = eval_op(tc, test.nc(), op_test, q.pts);
    Eigen::MatrixXd uv = eval_op(uc, trial.nc(), op_trial, q.pts);
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(q.w.data(), q.w.size());
    for (int i = 0; i < tc.size(); ++i)
      for (int j = 0; j < uc.size(); ++j) {
        double acc = 0.0;
        for (int k = 0; k < ct; ++k)
          acc += (tv.row(i * ct + k).array() * uv.row(j * ct + k).array() * w.transpose().array())
                     .sum();
        if (acc != 0.0) trips.emplace_back(tc.dofs[i], uc.dofs[j], acc);
      }
  }
  SpMat m(test.dim, trial.dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SpMat mass_matrix(const FeSpace& space) {
  return assemble_pairing(space, EvalOp::Value, space, EvalOp::Value);
}

SpMat hdiv_gram(const FeSpace& sigma_fe) {
  SpMat m = mass_matrix(sigma_fe);
  m += assemble_pairing(sigma_fe, EvalOp::RowDiv, sigma_fe, EvalOp::RowDiv);
  return m;
}

SpMat curl_gram(const FeSpace& xi) {
  return assemble_pairing(xi, EvalOp::RowCurl, xi, EvalOp::RowCurl);
}

SpMat compliance_matrix(const FeSpace& sigma_fe, const Material& mat) {
  const Mesh& mesh = *sigma_fe.mesh;
  QuadratureRule rule = quadrature_rule(mesh.cell_type, std::min(20, 2 * sigma_fe.max_degree + 2));
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis& cb = sigma_fe.cells[c];
    CellQuad q = cell_quadrature(mesh, c, rule);
    Eigen::MatrixXd v = eval_values(cb, 4, q.pts);
    int n = cb.size();
    // A is symmetric, so precompute A phi_j at the quadrature points.
    Eigen::MatrixXd av(n * 4, q.pts.size());
    for (int j = 0; j < n; ++j)
      for (size_t g = 0; g < q.pts.size(); ++g) {
        Mat2 t{v(j * 4, g), v(j * 4 + 1, g), v(j * 4 + 2, g), v(j * 4 + 3, g)};
        Mat2 at = compliance_apply(mat, t);
        for (int k = 0; k < 4; ++k) av(j * 4 + k, g) = at.a[k];
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        double acc = 0.0;
        for (size_t g = 0; g < q.pts.size(); ++g)
          for (int k = 0; k < 4; ++k) acc += q.w[g] * v(i * 4 + k, g) * av(j * 4 + k, g);
        trips.emplace_back(cb.dofs[i], cb.dofs[j], acc);
        if (i != j) trips.emplace_back(cb.dofs[j], cb.dofs[i], acc);
      }
  }
  SpMat m(sigma_fe.dim, sigma_fe.dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SaddleSystem assemble_saddle(const ElementTriple& triple, const Material& mat,
                             const FieldFn& body_force) {
  SaddleSystem sys;
  sys.triple = &triple;
  sys.mat = mat;
  sys.compliance = compliance_matrix(triple.sigma.fe, mat);
  sys.b_div = assemble_pairing(triple.displacement, EvalOp::Value, triple.sigma.fe, EvalOp::RowDiv);
  sys.b_skw = assemble_pairing(triple.rotation, EvalOp::Value, triple.sigma.fe, EvalOp::Value);

  const FeSpace& u = triple.displacement;
  const Mesh& mesh = *u.mesh;
  QuadratureRule rule = quadrature_rule(mesh.cell_type, std::min(20, u.max_degree + 12));
  sys.load = Eigen::VectorXd::Zero(u.dim);
  double fv[2];
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis& cb = u.cells[c];
    CellQuad q = cell_quadrature(mesh, c, rule);
    Eigen::MatrixXd v = eval_values(cb, 2, q.pts);
    for (size_t g = 0; g < q.pts.size(); ++g) {
      body_force(q.pts[g], fv);
      for (int i = 0; i < cb.size(); ++i)
        sys.load(cb.dofs[i]) += q.w[g] * (v(i * 2, g) * fv[0] + v(i * 2 + 1, g) * fv[1]);
    }
  }
  return sys;
}

SaddleSolution solve_saddle(const SaddleSystem& sys) {
  const ElementTriple& t = *sys.triple;
  int ns = t.sigma.fe.dim, nu = t.displacement.dim, ng = t.rotation.dim;
  int n = ns + nu + ng;

  std::vector<Eigen::Triplet<double>> trips;
  auto add_block = [&trips](const SpMat& m, int r0, int c0, bool also_transpose) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it) {
        trips.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        if (also_transpose) trips.emplace_back(c0 + it.col(), r0 + it.row(), it.value());
      }
  };
  add_block(sys.compliance, 0, 0, false);
  add_block(sys.b_div, ns, 0, true);
  add_block(sys.b_skw, ns + nu, 0, true);

  SpMat K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.segment(ns, nu) = -sys.load;

  Eigen::SparseLU<SpMat> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_saddle: LU factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);

  SaddleSolution sol;
  sol.solver_residual = (K * x - rhs).norm() / std::max(1.0, rhs.norm());
  sol.sigma = {&t.sigma.fe, x.segment(0, ns)};
  sol.u = {&t.displacement, x.segment(ns, nu)};
  sol.gamma = {&t.rotation, x.segment(ns + nu, ng)};
  return sol;
}

}  // namespace ws
