// SPDX-License-Identifier: Apache-2.0
#include "analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ws {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd dense(const SpMat& m) { return MatrixXd(m); }

MatrixXd blkdiag(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

MatrixXd vstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

// Field values of a coefficient vector on one cell, nc x nq.
MatrixXd local_field(const FeSpace& sp, const VectorXd& coef, int cell,
                     const std::vector<Vec2>& pts) {
  const CellBasis& cb = sp.cells[cell];
  int nc = sp.nc();
  MatrixXd vals = eval_values(cb, nc, pts);
  MatrixXd out = MatrixXd::Zero(nc, pts.size());
  for (int i = 0; i < cb.size(); ++i)
    for (int k = 0; k < nc; ++k) out.row(k) += coef(cb.dofs[i]) * vals.row(i * nc + k);
  return out;
}

double l2_error(const FieldCoefficients& fh, const FieldFn& exact, int quad_degree = 16) {
  const FeSpace& sp = *fh.space;
  const Mesh& mesh = *sp.mesh;
  int nc = sp.nc();
  QuadratureRule rule =
      quadrature_rule(mesh.cell_type, std::min(20, std::max(quad_degree, 2 * sp.max_degree)));
  std::vector<double> fv(nc);
  double acc = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellQuad q = cell_quadrature(mesh, c, rule);
    MatrixXd vals = local_field(sp, fh.coef, c, q.pts);
    for (size_t g = 0; g < q.pts.size(); ++g) {
      exact(q.pts[g], fv.data());
      for (int k = 0; k < nc; ++k) {
        double d = vals(k, g) - fv[k];
        acc += q.w[g] * d * d;
      }
    }
  }
  return std::sqrt(acc);
}

double postprocess_error(const ElementTriple& t, const SaddleSolution& sol,
                         const Manufactured& mc, const Material& mat) {
  const Mesh& mesh = *t.mesh;
  FeSpace star = build_pd_scalar(mesh, t.k + 1);
  int qdeg = std::min(20, std::max(16, 2 * std::max({star.max_degree, t.sigma.fe.max_degree,
                                                     t.rotation.max_degree}) + 2));
  QuadratureRule rule = quadrature_rule(mesh.cell_type, qdeg);
  double acc = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis& cb = star.cells[c];
    int n = cb.size();
    CellQuad q = cell_quadrature(mesh, c, rule);
    int nq = static_cast<int>(q.pts.size());
    MatrixXd grads = eval_grad_scalar(cb, q.pts);
    MatrixXd vals = eval_values(cb, 1, q.pts);
    MatrixXd sig = local_field(t.sigma.fe, sol.sigma.coef, c, q.pts);
    MatrixXd gam = local_field(t.rotation, sol.gamma.coef, c, q.pts);
    MatrixXd uh = local_field(t.displacement, sol.u.coef, c, q.pts);
    // G = A sigma_h + gamma_h = grad u for the exact solution.
    MatrixXd gfield(4, nq);
    for (int g = 0; g < nq; ++g) {
      Mat2 s{sig(0, g), sig(1, g), sig(2, g), sig(3, g)};
      Mat2 as = compliance_apply(mat, s);
      for (int k = 0; k < 4; ++k) gfield(k, g) = as.a[k] + gam(k, g);
    }
    // Component-wise Neumann problems on the mean-free modes.
    MatrixXd stiff = MatrixXd::Zero(n - 1, n - 1);
    for (int i = 1; i < n; ++i)
      for (int j = 1; j <= i; ++j) {
        double s = 0.0;
        for (int g = 0; g < nq; ++g)
          s += q.w[g] * (grads(i * 2, g) * grads(j * 2, g) +
                         grads(i * 2 + 1, g) * grads(j * 2 + 1, g));
        stiff(i - 1, j - 1) = stiff(j - 1, i - 1) = s;
      }
    Eigen::LDLT<MatrixXd> ldlt(stiff);
    for (int comp = 0; comp < 2; ++comp) {
      VectorXd rhs = VectorXd::Zero(n - 1);
      double c0 = 0.0;
      for (int g = 0; g < nq; ++g) {
        c0 += q.w[g] * uh(comp, g) * vals(0, g);
        for (int j = 1; j < n; ++j)
          rhs(j - 1) += q.w[g] * (gfield(comp * 2, g) * grads(j * 2, g) +
                                  gfield(comp * 2 + 1, g) * grads(j * 2 + 1, g));
      }
      VectorXd cj = ldlt.solve(rhs);
      for (int g = 0; g < nq; ++g) {
        double ustar = c0 * vals(0, g);
        for (int j = 1; j < n; ++j) ustar += cj(j - 1) * vals(j, g);
        Vec2 ue = mc.u(q.pts[g]);
        double d = (comp == 0 ? ue.x : ue.y) - ustar;
        acc += q.w[g] * d * d;
      }
    }
  }
  return std::sqrt(acc);
}

double kernel_coercivity(const ElementTriple& t, const MatrixXd& constraint,
                         const SpMat& mx, const Material& mat) {
  Eigen::BDCSVD<MatrixXd> svd(constraint, Eigen::ComputeFullV);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10 * smax) ++rank;
  int n = static_cast<int>(constraint.cols());
  if (rank == n) return std::nan("");
  MatrixXd z = svd.matrixV().rightCols(n - rank);
  MatrixXd ac = dense(compliance_matrix(t.sigma.fe, mat));
  MatrixXd za = z.transpose() * ac * z;
  MatrixXd zm = z.transpose() * dense(mx) * z;
  return min_generalized_eigenvalue(za, zm);
}

double stokes_infsup(const ElementTriple& t, const MatrixXd& g1, const MatrixXd& mgamma) {
  const FeSpace& xi = t.stokes;
  const FeSpace& gamma = t.rotation;
  if (g1.cols() == 0) return std::nan("");
  if (xi.dim == 0) return 0.0;
  MatrixXd kk = dense(curl_gram(xi));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(kk);
  double lmax = es.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < xi.dim; ++i)
    if (es.eigenvalues()(i) > 1e-12 * lmax) keep.push_back(i);
  MatrixXd bc = g1.transpose() *
                dense(assemble_pairing(gamma, EvalOp::Value, xi, EvalOp::RowCurl));
  MatrixXd ct(static_cast<int>(g1.cols()), static_cast<int>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i)
    ct.col(static_cast<int>(i)) =
        (bc * es.eigenvectors().col(keep[i])) / std::sqrt(es.eigenvalues()(keep[i]));
  MatrixXd s = ct * ct.transpose();
  MatrixXd m1 = g1.transpose() * mgamma * g1;
  double lam = min_generalized_eigenvalue(s, m1);
  return std::sqrt(std::max(0.0, lam));
}

double chidivs_orthogonality(const ElementTriple& t, const MatrixXd& g0) {
  if (g0.cols() == 0 || t.stokes.dim == 0) return 0.0;
  MatrixXd b = dense(assemble_pairing(t.rotation, EvalOp::Value, t.stokes, EvalOp::ChiDivS));
  MatrixXd n = dense(assemble_pairing(t.stokes, EvalOp::ChiDivS, t.stokes, EvalOp::ChiDivS));
  MatrixXd o = g0.transpose() * b;
  double worst = 0.0;
  for (int j = 0; j < o.cols(); ++j) {
    double nj = std::sqrt(std::max(n(j, j), 0.0));
    for (int i = 0; i < o.rows(); ++i)
      worst = std::max(worst, std::abs(o(i, j)) / (1e-30 + nj));
  }
  return worst;
}

}  // namespace

double min_generalized_eigenvalue(const MatrixXd& a, const MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges;
  ges.compute(a, b, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("min_generalized_eigenvalue: eigensolver failed");
  return ges.eigenvalues()(0);
}

double infsup_constant(const MatrixXd& b, const SpMat& mx, const MatrixXd& mq) {
  Eigen::SimplicialLLT<SpMat> llt(mx);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant: norm matrix not SPD");
  MatrixXd x = llt.solve(b.transpose());
  MatrixXd s = b * x;
  double lam = min_generalized_eigenvalue(0.5 * (s + s.transpose()), mq);
  return std::sqrt(std::max(0.0, lam));
}

StabilityReport certify_triple(const ElementTriple& t, int m) {
  const Mesh& mesh = *t.mesh;
  StabilityReport rep;
  rep.name = t.name;
  rep.k = t.k;
  rep.m = m;
  rep.cells = mesh.num_cells();
  rep.h = mesh.h_max();
  rep.sigma_dim = t.sigma.fe.dim;
  rep.u_dim = t.displacement.dim;
  rep.gamma_dim = t.rotation.dim;
  rep.xi_dim = t.stokes.dim;

  MatrixXd bdiv =
      dense(assemble_pairing(t.displacement, EvalOp::Value, t.sigma.fe, EvalOp::RowDiv));
  MatrixXd bskw =
      dense(assemble_pairing(t.rotation, EvalOp::Value, t.sigma.fe, EvalOp::Value));
  SpMat mx = hdiv_gram(t.sigma.fe);
  MatrixXd mu = dense(mass_matrix(t.displacement));
  MatrixXd mgamma = dense(mass_matrix(t.rotation));

  {
    Eigen::BDCSVD<MatrixXd> svd(bdiv);
    double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-10 * smax) ++rank;
    rep.a1_deficit = t.displacement.dim - rank;
  }

  MatrixXd constraint = vstack(bdiv, bskw);
  rep.beta = infsup_constant(constraint, mx, blkdiag(mu, mgamma));
  rep.alpha = kernel_coercivity(t, constraint, mx, Material{1.0, 1.0});

  auto [g0, g1] = gamma_split(t);
  if (g0.cols() > 0) {
    MatrixXd b2 = vstack(bdiv, MatrixXd(g0.transpose() * bskw));
    MatrixXd m0 = g0.transpose() * mgamma * g0;
    rep.beta_reduced = infsup_constant(b2, mx, blkdiag(mu, m0));
  } else {
    rep.beta_reduced = std::nan("");
  }
  rep.beta_stokes = stokes_infsup(t, g1, mgamma);
  rep.ortho_residual = chidivs_orthogonality(t, g0);
  IdentityResidual idr = discrete_identity_residual(t);
  rep.identity_pointwise = idr.pointwise;
  rep.identity_projected = idr.projected;

  bool reduced_ok = g0.cols() == 0 || rep.beta_reduced > 1e-8;
  bool stokes_ok = g1.cols() == 0 || rep.beta_stokes > 1e-8;
  rep.stable = rep.a1_deficit == 0 && rep.alpha > 1e-8 && rep.beta > 1e-8 && reduced_ok &&
               stokes_ok && rep.ortho_residual < 1e-10;
  return rep;
}

std::string stability_report_json(const StabilityReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["k"] = r.k;
  j["m"] = r.m;
  j["cells"] = r.cells;
  j["h"] = r.h;
  j["dims"] = {{"sigma", r.sigma_dim}, {"u", r.u_dim}, {"gamma", r.gamma_dim}, {"xi", r.xi_dim}};
  j["a1_deficit"] = r.a1_deficit;
  auto put = [&j](const char* key, double v) {
    if (std::isnan(v))
      j[key] = nullptr;
    else
      j[key] = v;
  };
  put("beta", r.beta);
  put("beta_reduced", r.beta_reduced);
  put("alpha", r.alpha);
  put("beta_stokes", r.beta_stokes);
  j["ortho_residual"] = r.ortho_residual;
  j["identity_pointwise"] = r.identity_pointwise;
  j["identity_projected"] = r.identity_projected;
  j["stable"] = r.stable;
  return j.dump(2);
}

// --- convergence -------------------------------------------------------------

Mesh build_triple_mesh(const std::string& name, int m) {
  if (name == "Rect2D" || name == "AwanouLow" || name == "rGG")
    return unit_square_rectgrid(m);
  if (name == "BaryBDM") return barycentric_subdivide(unit_square_triangulation(m));
  return unit_square_triangulation(m);
}

SolveErrors solve_and_measure(const ElementTriple& t, const Manufactured& mc,
                              const Material& mat) {
  FieldFn force = [&](Vec2 p, double* v) {
    Vec2 f = mc.body_force(mat, p);
    v[0] = f.x;
    v[1] = f.y;
  };
  SaddleSystem sys = assemble_saddle(t, mat, force);
  SolveErrors se;
  se.sol = solve_saddle(sys);

  FieldFn sigma_fn = [&](Vec2 p, double* v) {
    Mat2 s = mc.sigma(mat, p);
    for (int i = 0; i < 4; ++i) v[i] = s.a[i];
  };
  FieldFn u_fn = [&](Vec2 p, double* v) {
    Vec2 u = mc.u(p);
    v[0] = u.x;
    v[1] = u.y;
  };
  FieldFn gamma_fn = [&](Vec2 p, double* v) {
    double r = mc.gamma_r(p);
    v[0] = 0.0;
    v[1] = r;
    v[2] = -r;
    v[3] = 0.0;
  };

  RateRow& row = se.row;
  row.h = t.mesh->h_max();
  row.solver_residual = se.sol.solver_residual;
  row.err_sigma = l2_error(se.sol.sigma, sigma_fn);
  row.err_u = l2_error(se.sol.u, u_fn);
  row.err_gamma = l2_error(se.sol.gamma, gamma_fn);
  row.err_ustar = postprocess_error(t, se.sol, mc, mat);

  // || P_h u - u_h ||: the displacement space is L2 orthonormal.
  FieldCoefficients pu = l2_project(t.displacement, u_fn);
  row.err_pu = std::sqrt((pu.coef - se.sol.u.coef)
                             .dot(mass_matrix(t.displacement) * (pu.coef - se.sol.u.coef)));

  // Residuals of the discrete equations.
  VectorXd mom = sys.b_div * se.sol.sigma.coef + sys.load;
  row.momentum_residual = mom.norm();
  SpMat msig = mass_matrix(t.sigma.fe);
  double sig_norm = std::sqrt(se.sol.sigma.coef.dot(msig * se.sol.sigma.coef));
  SpMat mgam = mass_matrix(t.rotation);
  VectorXd skw = sys.b_skw * se.sol.sigma.coef;
  double worst = 0.0;
  for (int i = 0; i < skw.size(); ++i)
    worst = std::max(worst, std::abs(skw(i)) /
                                (1e-30 + sig_norm * std::sqrt(mgam.coeff(i, i))));
  row.weak_symmetry_residual = worst;

  // Quasi-optimality constant of the improved error estimate.
  FieldCoefficients pis = interpolate_sigma(t.sigma, sigma_fn);
  double interp_sigma = l2_error(pis, sigma_fn);
  FieldCoefficients qg = l2_project(t.rotation, gamma_fn);
  double proj_gamma = l2_error(qg, gamma_fn);
  row.c_improved =
      (row.err_sigma + row.err_pu + row.err_gamma) / (1e-300 + interp_sigma + proj_gamma);
  return se;
}

ConvergenceResult run_convergence(const std::string& name, int k,
                                  const std::string& case_name, const Material& mat,
                                  int levels, bool with_stability, int stability_dim_cap) {
  const Manufactured& mc = manufactured_case(case_name);
  ConvergenceResult res;
  res.name = name;
  res.k = k;
  res.case_name = case_name;
  res.mat = mat;

  for (int lev = 0; lev < levels; ++lev) {
    int m = 2 << lev;
    Mesh mesh = build_triple_mesh(name, m);
    ElementTriple t = make_triple(name, k, mesh);
    res.target = t.target_rates;
    SolveErrors se = solve_and_measure(t, mc, mat);
    se.row.level = lev;
    se.row.beta = std::nan("");
    se.row.alpha = std::nan("");
    if (with_stability &&
        t.displacement.dim + t.rotation.dim <= stability_dim_cap) {
      MatrixXd bdiv =
          dense(assemble_pairing(t.displacement, EvalOp::Value, t.sigma.fe, EvalOp::RowDiv));
      MatrixXd bskw =
          dense(assemble_pairing(t.rotation, EvalOp::Value, t.sigma.fe, EvalOp::Value));
      SpMat mx = hdiv_gram(t.sigma.fe);
      MatrixXd mq = blkdiag(dense(mass_matrix(t.displacement)), dense(mass_matrix(t.rotation)));
      MatrixXd constraint = vstack(bdiv, bskw);
      se.row.beta = infsup_constant(constraint, mx, mq);
      se.row.alpha = kernel_coercivity(t, constraint, mx, Material{1.0, 1.0});
    }
    res.rows.push_back(se.row);
  }

  std::vector<std::pair<double, double>> hs, hpu, hg;
  for (const auto& r : res.rows) {
    hs.push_back({r.h, r.err_sigma});
    hpu.push_back({r.h, r.err_pu});
    hg.push_back({r.h, r.err_gamma});
  }
  res.fitted = {fit_rate(hs), fit_rate(hpu), fit_rate(hg)};
  return res;
}

double fit_rate(const std::vector<std::pair<double, double>>& h_err, int use_last) {
  int n = static_cast<int>(h_err.size());
  int start = std::max(0, n - use_last);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = start; i < n; ++i) {
    if (h_err[i].second <= 0.0) continue;
    double x = std::log(h_err[i].first), y = std::log(h_err[i].second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) return 0.0;
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

std::string rates_csv(const ConvergenceResult& res) {
  std::ostringstream os;
  os << "level,h,err_sigma,err_pu,err_u,err_gamma,err_ustar,beta,alpha\n";
  char buf[512];
  for (const auto& r : res.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  r.level, r.h, r.err_sigma, r.err_pu, r.err_u, r.err_gamma, r.err_ustar,
                  r.beta, r.alpha);
    os << buf;
  }
  return os.str();
}

std::string rates_json(const ConvergenceResult& res) {
  nlohmann::json j;
  j["name"] = res.name;
  j["k"] = res.k;
  j["case"] = res.case_name;
  j["mu"] = res.mat.mu;
  j["lambda"] = res.mat.lambda;
  auto put = [](nlohmann::json& obj, const char* key, double v) {
    if (std::isnan(v))
      obj[key] = nullptr;
    else
      obj[key] = v;
  };
  j["rows"] = nlohmann::json::array();
  for (const auto& r : res.rows) {
    nlohmann::json row;
    row["level"] = r.level;
    row["h"] = r.h;
    row["err_sigma"] = r.err_sigma;
    row["err_pu"] = r.err_pu;
    row["err_u"] = r.err_u;
    row["err_gamma"] = r.err_gamma;
    row["err_ustar"] = r.err_ustar;
    put(row, "beta", r.beta);
    put(row, "alpha", r.alpha);
    row["c_improved"] = r.c_improved;
    row["momentum_residual"] = r.momentum_residual;
    row["weak_symmetry_residual"] = r.weak_symmetry_residual;
    row["solver_residual"] = r.solver_residual;
    j["rows"].push_back(row);
  }
  j["fitted_rates"] = {res.fitted[0], res.fitted[1], res.fitted[2]};
  j["target_rates"] = {res.target[0], res.target[1], res.target[2]};
  return j.dump(2);
}

}  // namespace ws
