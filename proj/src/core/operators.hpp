// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "spaces.hpp"

namespace ws {

// Pointwise matrix algebra (2D conventions: chi(r) = [[0, r], [-r, 0]],
// S xi = xi / 2, so that skw(curl xi) = chi(div S xi)).
inline Mat2 apply_chi(double r) { return Mat2{0.0, r, -r, 0.0}; }
inline double chi_inv(const Mat2& m) { return 0.5 * (m.a[1] - m.a[2]); }
inline Mat2 skw_part(const Mat2& m) {
  double r = 0.5 * (m.a[1] - m.a[2]);
  return apply_chi(r);
}
inline Mat2 sym_part(const Mat2& m) {
  double o = 0.5 * (m.a[1] + m.a[2]);
  return Mat2{m.a[0], o, o, m.a[3]};
}
inline Vec2 apply_S(Vec2 xi) { return xi * 0.5; }

// Exact field callback: components in the space's layout at a physical point.
using FieldFn = std::function<void(Vec2, double*)>;

// L2 projection onto a space (sparse mass solve; exact for modal spaces).
FieldCoefficients l2_project(const FeSpace& space, const FieldFn& f, int quad_degree = 16);

// Canonical H(div) interpolation via the space's dof functionals (edge
// Legendre moments plus the stored interior moments).
FieldCoefficients interpolate_hdiv(const HdivVectorSpace& hv, const FieldFn& vec_f);

// Row-wise interpolation of a matrix field; enrichment coefficients zero.
FieldCoefficients interpolate_sigma(const SigmaSpace& sigma, const FieldFn& mat_f);

// Max residual of skw(curl xi) = chi(div S xi) over the Stokes basis of a
// triple: pointwise on a quadrature set and after projection onto the
// rotation space.
struct IdentityResidual {
  double pointwise = 0.0;
  double projected = 0.0;
};
IdentityResidual discrete_identity_residual(const ElementTriple& triple);

}  // namespace ws
