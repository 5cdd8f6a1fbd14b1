// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "manufactured.hpp"

namespace ws {

// Numerical stability certificate of an element triple on one mesh.
struct StabilityReport {
  std::string name;
  int k = 1;
  int m = 0;  // mesh resolution parameter
  int cells = 0;
  double h = 0.0;
  int sigma_dim = 0, u_dim = 0, gamma_dim = 0, xi_dim = 0;

  // Surjectivity of div: rank deficit of (div tau, v); 0 is required.
  int a1_deficit = 0;
  // Inf-sup constant of the full constraint (div tau, v) + (tau, eta)
  // over U x Gamma, with the H(div) norm on Sigma.
  double beta = 0.0;
  // Same with Gamma replaced by the reduced space Gamma0 (nan if empty).
  double beta_reduced = 0.0;
  // Coercivity of the compliance form on the discrete constraint kernel.
  double alpha = 0.0;
  // Stokes-type inf-sup of (curl xi, eta) over Gamma1, curl seminorm on
  // Xi (nan when both Xi and Gamma1 are empty).
  double beta_stokes = 0.0;
  // max |(chi div S xi_j, eta_i)| over Gamma0, normalized.
  double ortho_residual = 0.0;
  // Residual of skw(curl xi) = chi(div S xi) over the Xi basis.
  double identity_pointwise = 0.0;
  double identity_projected = 0.0;

  bool stable = false;
};

StabilityReport certify_triple(const ElementTriple& triple, int m = 0);
std::string stability_report_json(const StabilityReport& rep);

// Generalized eigenvalue helpers (dense, symmetric, B SPD).
double min_generalized_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
// beta = sqrt(lambda_min(B Mx^{-1} B^T, Mq)).
double infsup_constant(const Eigen::MatrixXd& b, const SpMat& mx, const Eigen::MatrixXd& mq);

// --- convergence study ------------------------------------------------------

struct RateRow {
  int level = 0;
  double h = 0.0;
  double err_sigma = 0.0, err_pu = 0.0, err_u = 0.0, err_gamma = 0.0, err_ustar = 0.0;
  double beta = 0.0, alpha = 0.0;  // nan when skipped
  // Ratio (err_sigma + err_pu + err_gamma) / (interp sigma + proj gamma err).
  double c_improved = 0.0;
  double momentum_residual = 0.0;
  double weak_symmetry_residual = 0.0;
  double solver_residual = 0.0;
};

struct ConvergenceResult {
  std::string name;
  int k = 1;
  std::string case_name;
  Material mat;
  std::vector<RateRow> rows;
  std::array<double, 3> fitted{0, 0, 0};  // sigma, P_h u - u_h, gamma
  std::array<double, 3> target{0, 0, 0};
};

// Mesh family used by a triple at resolution m (triangular, rectangular,
// or barycentric-refined triangular).
Mesh build_triple_mesh(const std::string& name, int m);

ConvergenceResult run_convergence(const std::string& name, int k,
                                  const std::string& case_name, const Material& mat,
                                  int levels, bool with_stability,
                                  int stability_dim_cap = 3000);

// Least squares slope of log(err) vs log(h) over the last use_last rows.
double fit_rate(const std::vector<std::pair<double, double>>& h_err, int use_last = 3);

std::string rates_csv(const ConvergenceResult& res);
std::string rates_json(const ConvergenceResult& res);

// One mesh, one solve; exposed for tests and the locking study.
struct SolveErrors {
  RateRow row;
  SaddleSolution sol;
};
SolveErrors solve_and_measure(const ElementTriple& triple, const Manufactured& mc,
                              const Material& mat);

}  // namespace ws
