// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "poly.hpp"
#include "quadrature.hpp"

namespace ws {

// Value shape of a finite element space.  Skew fields are stored with the
// full 4 matrix components (0, r, -r, 0) so that every L2 pairing is a
// plain component sum; the chi identification factor sqrt(2) is then
// consistent everywhere automatically.
enum class ValueShape { Scalar, Vector, Matrix, Skew };

inline int value_components(ValueShape s) {
  switch (s) {
    case ValueShape::Scalar: return 1;
    case ValueShape::Vector: return 2;
    default: return 4;
  }
}

enum class DofKind { VertexNode, EdgeNode, FacetMoment, InteriorMoment, CellMode, Enrichment };

// Per-cell basis table: polynomials live in the cell's local frame and
// represent physical field values; physical derivatives pick up a factor
// 1/frame.scale per order.
struct CellBasis {
  Frame frame;
  std::vector<int> dofs;
  std::vector<Poly> funcs;  // dofs.size() * ncomp, dof-major

  int size() const { return static_cast<int>(dofs.size()); }
};

struct FeSpace {
  const Mesh* mesh = nullptr;
  ValueShape shape = ValueShape::Scalar;
  int dim = 0;
  int max_degree = 0;
  std::vector<CellBasis> cells;
  std::vector<DofKind> dof_kind;
  // Entity carrying each dof: vertex/edge/cell index depending on kind.
  std::vector<int> dof_entity;

  int nc() const { return value_components(shape); }
};

struct FieldCoefficients {
  const FeSpace* space = nullptr;
  Eigen::VectorXd coef;
};

// --- evaluation helpers -------------------------------------------------

struct CellQuad {
  std::vector<Vec2> pts;  // physical points
  std::vector<double> w;  // physical weights
};

CellQuad cell_quadrature(const Mesh& mesh, int cell, const QuadratureRule& ref);

// Basis values at physical points, laid out (nloc * nc) x nq.
Eigen::MatrixXd eval_values(const CellBasis& cb, int nc, const std::vector<Vec2>& pts);
// Row-wise divergence: matrix (nc=4) -> 2 comps per dof, vector -> 1.
Eigen::MatrixXd eval_rowdiv(const CellBasis& cb, int nc, const std::vector<Vec2>& pts);
// Row-wise curl of a vector field -> 4 comps per dof.
Eigen::MatrixXd eval_rowcurl_vec(const CellBasis& cb, const std::vector<Vec2>& pts);
// chi(div S xi) of a vector field -> 4 comps per dof.
Eigen::MatrixXd eval_chidivS_vec(const CellBasis& cb, const std::vector<Vec2>& pts);
// Gradient of a scalar field -> 2 comps per dof.
Eigen::MatrixXd eval_grad_scalar(const CellBasis& cb, const std::vector<Vec2>& pts);

// Value of a coefficient field at a physical point of a given cell
// (components in the space's layout).
std::vector<double> eval_field(const FieldCoefficients& f, int cell, Vec2 p);

// --- space descriptors and builders --------------------------------------

enum class Family { RTN, BDM, rBDM, rRTN, Pd, Qd, Pc, Qc, S2c, BubbleVec, CurlBubbleHat, CurlBubbleHatRect };

struct SpaceDescriptor {
  Family family;
  int degree = 0;
  ValueShape shape = ValueShape::Scalar;
};

// Cell-wise modal L2-orthonormal scalar spaces (weight 2 for skew usage).
FeSpace build_pd_scalar(const Mesh& mesh, int k, double ip_weight = 1.0);
FeSpace build_qd_scalar(const Mesh& mesh, int k, double ip_weight = 1.0);

// Continuous nodal scalar spaces.
FeSpace build_lagrange_tri(const Mesh& mesh, int k);  // P_k^c, k = 1..4
FeSpace build_q1(const Mesh& mesh);                   // Q_1^c
FeSpace build_s2(const Mesh& mesh);                   // serendipity, 8 local dofs

// Component copies scalar -> vector, and skew wrapping (0, r, -r, 0).
FeSpace vectorize(const FeSpace& scalar);
FeSpace skewize(const FeSpace& scalar);

// H(div)-conforming vector space with edge normal moments shared between
// cells, interior moments against gradients of the paired displacement
// space (degree k-1), and an orthonormalized complement.
struct HdivVectorSpace {
  FeSpace fe;
  Family family = Family::BDM;
  int degree = 1;
  int moments_per_edge = 0;
  // Interior moment weight fields per cell (local frame), in dof order
  // following the edge block.
  std::vector<std::vector<PolyVec>> interior_moments;
};

HdivVectorSpace build_hdiv_vector(const Mesh& mesh, Family family, int k);

// Matrix-valued H(div) space: two independent row copies of a vector
// space plus an optional cell-local enrichment block of divergence-free,
// zero-normal-trace matrix fields.
struct SigmaSpace {
  FeSpace fe;  // Matrix shape; dofs: [row0 | row1 | enrichment]
  HdivVectorSpace vec;
  int base_dim = 0;  // 2 * vec.fe.dim
  std::vector<std::pair<int, int>> enrich_range;  // per cell, global dof range
};

enum class BubbleKind { Peers, BHat, BFull, BHatRect };

// Bubble-type Stokes spaces Xi_h: cell-local vector fields.
//   Peers:    b_T p, p in R^2                       (the PEERS B space)
//   BHat:     h_T^{-2} b_T rot r, r in P^_k(T)      (B^_k)
//   BFull:    b_T p, p in P_{k-1}(T; R^2)           (B_k)
//   BHatRect: as BHat with the quartic bubble b_T^r (B^_k^r)
FeSpace build_bubble_xi(const Mesh& mesh, BubbleKind kind, int k);

// Basis of curl(Xi_h) as matrix H(div) fields, one cell block per cell
// (before any redundancy removal).
FeSpace build_curl_bubble_image(const Mesh& mesh, BubbleKind kind, int k);

SigmaSpace build_sigma(const Mesh& mesh, Family family, int k);
SigmaSpace build_sigma_enriched(const Mesh& mesh, Family family, int k,
                                BubbleKind kind, int bubble_k);

// Generic catalogue entry point (spec'd dof functionals per family).
FeSpace build_space(const Mesh& mesh, const SpaceDescriptor& d);

// --- element triples ------------------------------------------------------

enum class Gamma0Kind { None, CellConstant, MacroConstant };

struct ElementTriple {
  std::string name;
  int k = 1;
  const Mesh* mesh = nullptr;
  SigmaSpace sigma;
  FeSpace displacement;  // Vector
  FeSpace rotation;      // Skew
  Gamma0Kind gamma0 = Gamma0Kind::None;
  FeSpace stokes;        // Vector; dim 0 when the split has Gamma_h^1 = 0
  std::array<double, 3> target_rates{0, 0, 0};  // sigma, P_h u - u_h, gamma
};

// Known triple names: PEERS, THB, Rect2D, AFW, CGG, GG, Stenberg, BaryBDM,
// AwanouLow, rGG, and the detector-honesty probe UNSTABLE_PROBE.
ElementTriple make_triple(const std::string& name, int k, const Mesh& mesh);

const std::vector<std::string>& triple_catalogue();

// L2-orthonormal coefficient bases of Gamma_h^0 and its complement, as
// dense column matrices in the rotation-space coefficients.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gamma_split(const ElementTriple& triple);

std::string space_dims_json(const ElementTriple& triple);

}  // namespace ws
