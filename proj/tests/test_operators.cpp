// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "core/assembly.hpp"
#include "core/operators.hpp"

using namespace ws;

namespace {

Mesh reference_triangle() {
  return mesh_from_arrays(CellType::Triangle, {{0, 0}, {1, 0}, {0, 1}},
                          {{{0, 1, 2, -1}}});
}

// L2 norm of a coefficient field via its mass matrix.
double field_norm(const FieldCoefficients& f) {
  SpMat m = mass_matrix(*f.space);
  return std::sqrt(f.coef.dot(m * f.coef));
}

// L2 distance between a coefficient field and an exact callback.
double field_error(const FieldCoefficients& f, const FieldFn& exact) {
  const FeSpace& sp = *f.space;
  const Mesh& mesh = *sp.mesh;
  int nc = sp.nc();
  QuadratureRule rule = quadrature_rule(mesh.cell_type, std::min(20, 2 * sp.max_degree + 8));
  std::vector<double> fv(nc);
  double acc = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellQuad q = cell_quadrature(mesh, c, rule);
    for (size_t g = 0; g < q.pts.size(); ++g) {
      exact(q.pts[g], fv.data());
      std::vector<double> vals = eval_field(f, c, q.pts[g]);
      for (int k = 0; k < nc; ++k) {
        double d = vals[k] - fv[k];
        acc += q.w[g] * d * d;
      }
    }
  }
  return std::sqrt(acc);
}

// || div interp - project(div) || for the commuting-square check.
double commuting_residual(const HdivVectorSpace& hv, const FeSpace& u_space,
                          const FieldFn& vec_f, const FieldFn& div_f) {
  FieldCoefficients pi = interpolate_hdiv(hv, vec_f);
  FieldCoefficients pdiv = l2_project(u_space, div_f);
  const Mesh& mesh = *hv.fe.mesh;
  QuadratureRule rule = quadrature_rule(mesh.cell_type, std::min(20, 2 * hv.fe.max_degree + 6));
  double acc = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellQuad q = cell_quadrature(mesh, c, rule);
    Eigen::MatrixXd divs = eval_rowdiv(hv.fe.cells[c], 2, q.pts);
    const CellBasis& cb = hv.fe.cells[c];
    for (size_t g = 0; g < q.pts.size(); ++g) {
      double dh = 0.0;
      for (int i = 0; i < cb.size(); ++i) dh += pi.coef(cb.dofs[i]) * divs(i, g);
      double dp = eval_field(pdiv, c, q.pts[g])[0];
      acc += q.w[g] * (dh - dp) * (dh - dp);
    }
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("algebraic operators S, chi, skw") {
  Vec2 z = apply_S({0.0, 0.0});
  CHECK(z.x == 0.0);
  CHECK(z.y == 0.0);
  Vec2 s = apply_S({2.0, 4.0});
  CHECK(s.x == doctest::Approx(1.0));
  CHECK(s.y == doctest::Approx(2.0));
  Vec2 back = apply_S({-0.7, 3.1}) * 2.0;
  CHECK(back.x == doctest::Approx(-0.7));
  CHECK(back.y == doctest::Approx(3.1));

  Mat2 c1 = apply_chi(1.0);
  CHECK(c1.a[0] == 0.0);
  CHECK(c1.a[1] == 1.0);
  CHECK(c1.a[2] == -1.0);
  CHECK(c1.a[3] == 0.0);
  CHECK(apply_chi(0.0).frob() == 0.0);
  CHECK(chi_inv(apply_chi(-3.5)) == doctest::Approx(-3.5));

  Mat2 sym{1.0, 2.0, 2.0, -4.0};
  CHECK(skw_part(sym).frob() == doctest::Approx(0.0));
  Mat2 m{0.0, 2.0, 0.0, 0.0};
  Mat2 k = skw_part(m);
  CHECK(k.a[1] == doctest::Approx(1.0));
  CHECK(k.a[2] == doctest::Approx(-1.0));
  Mat2 kk = skw_part(k);
  for (int i = 0; i < 4; ++i) CHECK(kk.a[i] == doctest::Approx(k.a[i]));

  Mat2 full{1.0, 2.0, 3.0, 4.0};
  Mat2 sum = sym_part(full) + skw_part(full);
  for (int i = 0; i < 4; ++i) CHECK(sum.a[i] == doctest::Approx(full.a[i]));
}

TEST_CASE("l2 projection: cell mean oracle on the reference triangle") {
  Mesh mesh = reference_triangle();
  FeSpace p0 = build_pd_scalar(mesh, 0);
  FieldFn fx = [](Vec2 p, double* v) { v[0] = p.x; };
  FieldCoefficients proj = l2_project(p0, fx);
  // Mean of x over the reference triangle is (1/6)/(1/2) = 1/3.
  CHECK(eval_field(proj, 0, {0.2, 0.3})[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("l2 projection: round trip, orthogonality, contraction") {
  Mesh mesh = unit_square_triangulation(2);
  FeSpace p2 = build_pd_scalar(mesh, 2);

  // Member of the space projects to itself.
  FieldFn member = [](Vec2 p, double* v) { v[0] = 1.5 - p.x + 2.0 * p.x * p.y; };
  FieldCoefficients pr = l2_project(p2, member);
  CHECK(field_error(pr, member) <= 1e-12);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    double a = dist(rng), b = dist(rng), c = dist(rng);
    FieldFn f = [a, b, c](Vec2 p, double* v) {
      v[0] = a * std::sin(3.0 * p.x + b) * std::cos(2.0 * p.y) + c * p.x * p.x * p.y;
    };
    FieldCoefficients pf = l2_project(p2, f);

    // Contraction in L2.
    QuadratureRule rule = quadrature_rule(mesh.cell_type, 16);
    double fn = 0.0;
    double fv;
    for (int cell = 0; cell < mesh.num_cells(); ++cell) {
      CellQuad q = cell_quadrature(mesh, cell, rule);
      for (size_t g = 0; g < q.pts.size(); ++g) {
        f(q.pts[g], &fv);
        fn += q.w[g] * fv * fv;
      }
    }
    fn = std::sqrt(fn);
    CHECK(field_norm(pf) <= fn * (1.0 + 1e-12));

    // Galerkin orthogonality against every basis function: (f - Pf, phi) = 0.
    double worst = 0.0;
    for (int cell = 0; cell < mesh.num_cells(); ++cell) {
      const CellBasis& cb = p2.cells[cell];
      CellQuad q = cell_quadrature(mesh, cell, rule);
      Eigen::MatrixXd vals = eval_values(cb, 1, q.pts);
      for (int i = 0; i < cb.size(); ++i) {
        double acc = 0.0, pn = 0.0;
        for (size_t g = 0; g < q.pts.size(); ++g) {
          f(q.pts[g], &fv);
          double r = fv - eval_field(pf, cell, q.pts[g])[0];
          acc += q.w[g] * r * vals(i, g);
          pn += q.w[g] * vals(i, g) * vals(i, g);
        }
        worst = std::max(worst, std::abs(acc) / (1e-30 + fn * std::sqrt(pn)));
      }
    }
    CHECK(worst <= 1e-11);
  }
}

TEST_CASE("hdiv interpolation: round trip and commuting square") {
  Mesh mesh = unit_square_triangulation(2);
  for (Family fam : {Family::BDM, Family::RTN}) {
    int k = 2;
    HdivVectorSpace hv = build_hdiv_vector(mesh, fam, k);
    FeSpace u_space = build_pd_scalar(mesh, k - 1);

    // Round trip of a space member (affine fields are in both families).
    FieldFn member = [](Vec2 p, double* v) {
      v[0] = 0.25 + p.y - 0.5 * p.x;
      v[1] = p.x + 0.75 * p.y;
    };
    FieldCoefficients pi = interpolate_hdiv(hv, member);
    CHECK(field_error(pi, member) <= 1e-12);

    // div interp = project(div) for random smooth fields.
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
      double a = dist(rng), b = dist(rng);
      FieldFn f = [a, b](Vec2 p, double* v) {
        v[0] = std::sin(a + 2.0 * p.x) * std::cos(p.y);
        v[1] = std::exp(b * p.x) * std::sin(2.0 * p.y);
      };
      FieldFn df = [a, b](Vec2 p, double* v) {
        v[0] = 2.0 * std::cos(a + 2.0 * p.x) * std::cos(p.y) +
               2.0 * std::exp(b * p.x) * std::cos(2.0 * p.y);
      };
      CHECK(commuting_residual(hv, u_space, f, df) <= 1e-10);
    }
  }
}

TEST_CASE("hdiv interpolation error rate is k+1 for BDM_k") {
  FieldFn f = [](Vec2 p, double* v) {
    v[0] = std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
    v[1] = std::cos(p.x + 2.0 * p.y);
  };
  for (int k : {1, 2}) {
    std::vector<std::pair<double, double>> h_err;
    for (int m : {2, 4, 8}) {
      Mesh mesh = unit_square_triangulation(m);
      HdivVectorSpace hv = build_hdiv_vector(mesh, Family::BDM, k);
      FieldCoefficients pi = interpolate_hdiv(hv, f);
      h_err.push_back({mesh.h_max(), field_error(pi, f)});
    }
    double rate = std::log(h_err[1].second / h_err[2].second) / std::log(2.0);
    CHECK(rate == doctest::Approx(k + 1.0).epsilon(0.2 / (k + 1.0)));
  }
}

TEST_CASE("div of the curl enrichment block vanishes") {
  Mesh mesh = unit_square_triangulation(2);
  ElementTriple t = make_triple("GG", 2, mesh);
  SpMat bdiv = assemble_pairing(t.displacement, EvalOp::Value, t.sigma.fe, EvalOp::RowDiv);
  Eigen::MatrixXd d(bdiv);
  for (auto [b, e] : t.sigma.enrich_range)
    for (int j = b; j < e; ++j) CHECK(d.col(j).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("matrix interpolation respects rows and enrichment zeros") {
  Mesh mesh = unit_square_triangulation(2);
  SigmaSpace sig = build_sigma_enriched(mesh, Family::BDM, 2, BubbleKind::BHat, 2);
  FieldFn mat_f = [](Vec2 p, double* v) {
    v[0] = p.x + 0.5;
    v[1] = p.y * p.x;
    v[2] = -p.y;
    v[3] = 1.0 - p.x * p.x;
  };
  FieldCoefficients pi = interpolate_sigma(sig, mat_f);
  CHECK(field_error(pi, mat_f) <= 1e-12);
  for (auto [b, e] : sig.enrich_range)
    for (int j = b; j < e; ++j) CHECK(pi.coef(j) == 0.0);
}

TEST_CASE("identity residual vanishes for a constant-extended Xi") {
  Mesh mesh = unit_square_triangulation(4);
  for (const char* name : {"PEERS", "Stenberg", "BaryBDM"}) {
    Mesh use = std::string(name) == "BaryBDM" ? barycentric_subdivide(mesh) : mesh;
    ElementTriple t = make_triple(name, std::string(name) == "Stenberg" ? 2 : 1, use);
    IdentityResidual r = discrete_identity_residual(t);
    CHECK(r.pointwise <= 1e-12);
    CHECK(r.projected <= 1e-12);
  }
}
