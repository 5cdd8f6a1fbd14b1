// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Sparse>

#include "operators.hpp"
#include "spaces.hpp"

namespace ws {

struct Material {
  double mu = 1.0;
  double lambda = 1.0;
};

// Compliance in 2D: A tau = (sym tau - lambda/(2mu + 2lambda) tr(tau) I) / (2mu)
// plus the identity on the skew part.
Mat2 compliance_apply(const Material& mat, const Mat2& tau);

using SpMat = Eigen::SparseMatrix<double>;

// What to evaluate on each side of an L2 pairing.
enum class EvalOp { Value, RowDiv, RowCurl, ChiDivS };

// (op_trial(phi_j), op_test(psi_i))_{L2}; component counts must match.
SpMat assemble_pairing(const FeSpace& test, EvalOp op_test, const FeSpace& trial,
                       EvalOp op_trial, int quad_degree = -1);

SpMat mass_matrix(const FeSpace& space);
// H(div) norm Gram: (tau, sigma) + (div tau, div sigma).
SpMat hdiv_gram(const FeSpace& sigma_fe);
// Curl seminorm Gram of a vector space.
SpMat curl_gram(const FeSpace& xi);
// (A tau_j, tau_i) for a matrix-valued space.
SpMat compliance_matrix(const FeSpace& sigma_fe, const Material& mat);

struct SaddleSystem {
  const ElementTriple* triple = nullptr;
  Material mat;
  SpMat compliance;  // sigma x sigma
  SpMat b_div;       // u x sigma, (div tau, v)
  SpMat b_skw;       // gamma x sigma, (tau, eta)
  Eigen::VectorXd load;  // (f, v_i) on the displacement space
};

SaddleSystem assemble_saddle(const ElementTriple& triple, const Material& mat,
                             const FieldFn& body_force);

struct SaddleSolution {
  FieldCoefficients sigma;
  FieldCoefficients u;
  FieldCoefficients gamma;
  double solver_residual = 0.0;
};

SaddleSolution solve_saddle(const SaddleSystem& sys);

}  // namespace ws
