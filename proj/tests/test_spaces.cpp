// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "core/mesh.hpp"
#include "core/operators.hpp"
#include "core/spaces.hpp"

using namespace ws;

namespace {

// Max jump of the normal trace across interior edges for random
// coefficient vectors (H(div) conformity).
double normal_jump(const FeSpace& sp, unsigned seed) {
  const Mesh& mesh = *sp.mesh;
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  FieldCoefficients f{&sp, Eigen::VectorXd::Zero(sp.dim)};
  for (int i = 0; i < sp.dim; ++i) f.coef(i) = dist(rng);
  Quadrature1D q = gauss1d(8);
  double worst = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    int c0 = mesh.edge_cells[e][0], c1 = mesh.edge_cells[e][1];
    if (c1 < 0) continue;
    Vec2 a = mesh.vertices[mesh.edges[e][0]];
    Vec2 b = mesh.vertices[mesh.edges[e][1]];
    Vec2 n = mesh.edge_normal(e);
    for (double s : q.points) {
      Vec2 p = a + (b - a) * s;
      auto v0 = eval_field(f, c0, p);
      auto v1 = eval_field(f, c1, p);
      if (sp.nc() == 2) {
        worst = std::max(worst, std::abs((v0[0] - v1[0]) * n.x + (v0[1] - v1[1]) * n.y));
      } else {
        worst = std::max(worst, std::abs((v0[0] - v1[0]) * n.x + (v0[1] - v1[1]) * n.y));
        worst = std::max(worst, std::abs((v0[2] - v1[2]) * n.x + (v0[3] - v1[3]) * n.y));
      }
    }
  }
  return worst;
}

double value_jump(const FeSpace& sp, unsigned seed) {
  const Mesh& mesh = *sp.mesh;
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  FieldCoefficients f{&sp, Eigen::VectorXd::Zero(sp.dim)};
  for (int i = 0; i < sp.dim; ++i) f.coef(i) = dist(rng);
  Quadrature1D q = gauss1d(8);
  double worst = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    int c0 = mesh.edge_cells[e][0], c1 = mesh.edge_cells[e][1];
    if (c1 < 0) continue;
    Vec2 a = mesh.vertices[mesh.edges[e][0]];
    Vec2 b = mesh.vertices[mesh.edges[e][1]];
    for (double s : q.points) {
      Vec2 p = a + (b - a) * s;
      auto v0 = eval_field(f, c0, p);
      auto v1 = eval_field(f, c1, p);
      for (size_t k = 0; k < v0.size(); ++k) worst = std::max(worst, std::abs(v0[k] - v1[k]));
    }
  }
  return worst;
}

// Does the vector space reproduce the given local-frame-free physical
// polynomial field on every cell after canonical interpolation?
double reproduce_error(const HdivVectorSpace& hv, const FieldFn& f) {
  FieldCoefficients c = interpolate_hdiv(hv, f);
  const Mesh& mesh = *hv.fe.mesh;
  QuadratureRule rule = quadrature_rule(mesh.cell_type, 12);
  double worst = 0.0;
  double fv[2];
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    CellQuad q = cell_quadrature(mesh, cell, rule);
    for (auto& p : q.pts) {
      auto v = eval_field(c, cell, p);
      f(p, fv);
      worst = std::max({worst, std::abs(v[0] - fv[0]), std::abs(v[1] - fv[1])});
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("space dimensions from the catalogue") {
  Mesh m1 = unit_square_triangulation(1);
  HdivVectorSpace bdm1 = build_hdiv_vector(m1, Family::BDM, 1);
  CHECK(bdm1.fe.dim == 10);
  SigmaSpace sig = build_sigma(m1, Family::BDM, 1);
  CHECK(sig.fe.dim == 20);

  Mesh m2 = unit_square_triangulation(2);
  FeSpace p0v = vectorize(build_pd_scalar(m2, 0));
  CHECK(p0v.dim == 16);
  FeSpace p1skw = skewize(build_lagrange_tri(m2, 1));
  CHECK(p1skw.dim == 9);

  // dim P_k scalar spaces on both cell types.
  for (int k = 0; k <= 4; ++k)
    CHECK(build_pd_scalar(m1, k).dim == m1.num_cells() * (k + 1) * (k + 2) / 2);
  Mesh r2 = unit_square_rectgrid(2);
  for (int k = 0; k <= 4; ++k)
    CHECK(build_qd_scalar(r2, k).dim == r2.num_cells() * (k + 1) * (k + 1));
  CHECK(build_s2(r2).dim == r2.num_vertices() + r2.num_edges());

  // B^_1 has 2 fields per triangle.
  FeSpace bhat1 = build_bubble_xi(m2, BubbleKind::BHat, 1);
  CHECK(bhat1.dim == 2 * m2.num_cells());

  // RTN_k and BDM_k global dimension formulas.
  Mesh m3 = unit_square_triangulation(3);
  for (int k = 1; k <= 3; ++k) {
    HdivVectorSpace rtn = build_hdiv_vector(m3, Family::RTN, k);
    CHECK(rtn.fe.dim == m3.num_edges() * k + m3.num_cells() * k * (k - 1));
    HdivVectorSpace bdm = build_hdiv_vector(m3, Family::BDM, k);
    CHECK(bdm.fe.dim ==
          m3.num_edges() * (k + 1) + m3.num_cells() * ((k + 1) * (k + 2) - 3 * (k + 1)));
  }
}

TEST_CASE("degree and family guards") {
  Mesh tri = unit_square_triangulation(2);
  Mesh rect = unit_square_rectgrid(2);
  CHECK_THROWS(build_hdiv_vector(tri, Family::BDM, 0));
  CHECK_THROWS(build_hdiv_vector(rect, Family::BDM, 1));
  CHECK_THROWS(build_hdiv_vector(tri, Family::rBDM, 1));
  CHECK_THROWS(build_lagrange_tri(rect, 1));
  CHECK_THROWS(build_qd_scalar(tri, 1));
  CHECK_THROWS(build_bubble_xi(tri, BubbleKind::BHat, 0));
}

TEST_CASE("H(div) conformity: normal continuity") {
  Mesh tri = unit_square_triangulation(2);
  CHECK(normal_jump(build_hdiv_vector(tri, Family::BDM, 1).fe, 1) < 1e-12);
  CHECK(normal_jump(build_hdiv_vector(tri, Family::BDM, 3).fe, 2) < 1e-11);
  CHECK(normal_jump(build_hdiv_vector(tri, Family::RTN, 2).fe, 3) < 1e-12);
  Mesh rect = unit_square_rectgrid(2);
  CHECK(normal_jump(build_hdiv_vector(rect, Family::rBDM, 1).fe, 4) < 1e-12);
  CHECK(normal_jump(build_hdiv_vector(rect, Family::rRTN, 2).fe, 5) < 1e-12);
  // Enriched matrix spaces stay conforming.
  CHECK(normal_jump(build_sigma_enriched(tri, Family::BDM, 2, BubbleKind::BHat, 2).fe, 6) < 1e-11);
}

TEST_CASE("H1 conformity of nodal spaces") {
  Mesh tri = unit_square_triangulation(2);
  CHECK(value_jump(build_lagrange_tri(tri, 1), 11) < 1e-12);
  CHECK(value_jump(build_lagrange_tri(tri, 3), 12) < 1e-11);
  Mesh rect = unit_square_rectgrid(3);
  CHECK(value_jump(build_q1(rect), 13) < 1e-12);
  CHECK(value_jump(build_s2(rect), 14) < 1e-12);
  Mesh bary = barycentric_subdivide(tri);
  ElementTriple bt = make_triple("BaryBDM", 1, bary);
  CHECK(value_jump(bt.stokes, 15) < 1e-11);
}

TEST_CASE("lagrange partition of unity and nodal property") {
  Mesh tri = unit_square_triangulation(2);
  for (int k = 1; k <= 4; ++k) {
    FeSpace sp = build_lagrange_tri(tri, k);
    FieldCoefficients one{&sp, Eigen::VectorXd::Ones(sp.dim)};
    for (int c = 0; c < tri.num_cells(); ++c) {
      CellQuad q = cell_quadrature(tri, c, quadrature_rule(CellType::Triangle, 6));
      for (auto& p : q.pts) CHECK(eval_field(one, c, p)[0] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("local polynomial reproduction") {
  Mesh tri = unit_square_triangulation(2);
  // P_k(T; R^2) subset of BDM_k, k <= 3.
  for (int k = 1; k <= 3; ++k) {
    HdivVectorSpace bdm = build_hdiv_vector(tri, Family::BDM, k);
    FieldFn f = [k](Vec2 p, double* v) {
      v[0] = std::pow(p.x, k) + 0.5 * std::pow(p.y, k);
      v[1] = (k > 1 ? 0.7 * p.x * p.y : 0.0) + p.y + 0.3;
    };
    CHECK(reproduce_error(bdm, f) < 1e-11);
  }
  // RTN_1 reproduces constants and x.
  HdivVectorSpace rtn1 = build_hdiv_vector(tri, Family::RTN, 1);
  FieldFn aff = [](Vec2 p, double* v) {
    v[0] = 1.0 + 2.0 * p.x;
    v[1] = -0.5 + 2.0 * p.y;
  };
  CHECK(reproduce_error(rtn1, aff) < 1e-12);
  // rBDM_1 reproduces all of P_1.
  Mesh rect = unit_square_rectgrid(2);
  HdivVectorSpace rbdm = build_hdiv_vector(rect, Family::rBDM, 1);
  FieldFn lin = [](Vec2 p, double* v) {
    v[0] = 0.25 - p.x + 2.0 * p.y;
    v[1] = 1.0 + 0.5 * p.x - p.y;
  };
  CHECK(reproduce_error(rbdm, lin) < 1e-12);
}

TEST_CASE("curl bubble image: divergence free with zero normal trace") {
  Mesh tri = unit_square_triangulation(2);
  for (auto kind : {BubbleKind::Peers, BubbleKind::BHat, BubbleKind::BFull}) {
    FeSpace img = build_curl_bubble_image(tri, kind, 2);
    QuadratureRule rule = quadrature_rule(CellType::Triangle, 8);
    Quadrature1D erule = gauss1d(8);
    for (int c = 0; c < tri.num_cells(); ++c) {
      const CellBasis& cb = img.cells[c];
      CellQuad q = cell_quadrature(tri, c, rule);
      Eigen::MatrixXd divs = eval_rowdiv(cb, 4, q.pts);
      CHECK(divs.cwiseAbs().maxCoeff() < 1e-12);
      for (int le = 0; le < 3; ++le) {
        int e = tri.cell_edges[c][le];
        Vec2 a = tri.vertices[tri.edges[e][0]];
        Vec2 b = tri.vertices[tri.edges[e][1]];
        Vec2 n = tri.edge_normal(e);
        for (double s : erule.points) {
          std::vector<Vec2> pt = {a + (b - a) * s};
          Eigen::MatrixXd v = eval_values(cb, 4, pt);
          for (int i = 0; i < cb.size(); ++i) {
            CHECK(std::abs(v(i * 4, 0) * n.x + v(i * 4 + 1, 0) * n.y) < 1e-12);
            CHECK(std::abs(v(i * 4 + 2, 0) * n.x + v(i * 4 + 3, 0) * n.y) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("curl of B-hat k-1 lies in BDM_k") {
  Mesh tri = unit_square_triangulation(2);
  for (int k = 2; k <= 3; ++k) {
    FeSpace img = build_curl_bubble_image(tri, BubbleKind::BHat, k - 1);
    HdivVectorSpace bdm = build_hdiv_vector(tri, Family::BDM, k);
    // Row-wise canonical interpolation reproduces each enrichment field.
    for (int c = 0; c < tri.num_cells(); ++c) {
      const CellBasis& cb = img.cells[c];
      for (int i = 0; i < cb.size(); ++i) {
        FieldCoefficients one{&img, Eigen::VectorXd::Zero(img.dim)};
        one.coef(cb.dofs[i]) = 1.0;
        for (int row = 0; row < 2; ++row) {
          FieldFn rf = [&one, c, row](Vec2 p, double* v) {
            auto val = eval_field(one, c, p);
            v[0] = val[2 * row];
            v[1] = val[2 * row + 1];
          };
          FieldCoefficients pc = interpolate_hdiv(bdm, rf);
          QuadratureRule rule = quadrature_rule(CellType::Triangle, 10);
          CellQuad q = cell_quadrature(tri, c, rule);
          double worst = 0.0;
          double fv[2];
          for (auto& p : q.pts) {
            auto v = eval_field(pc, c, p);
            rf(p, fv);
            worst = std::max({worst, std::abs(v[0] - fv[0]), std::abs(v[1] - fv[1])});
          }
          CHECK(worst < 1e-11);
        }
      }
    }
  }
}

TEST_CASE("triple catalogue basics") {
  Mesh tri = unit_square_triangulation(2);
  ElementTriple afw = make_triple("AFW", 1, tri);
  CHECK(afw.sigma.fe.dim == 2 * (tri.num_edges() * 2));
  CHECK(afw.displacement.dim == 2 * tri.num_cells());
  CHECK(afw.rotation.dim == tri.num_cells());
  CHECK(afw.target_rates[0] == doctest::Approx(1.0));

  ElementTriple peers = make_triple("PEERS", 1, tri);
  CHECK(peers.rotation.dim == tri.num_vertices());
  CHECK(peers.sigma.fe.dim > peers.sigma.base_dim);  // curl B enrichment kept
  CHECK(peers.target_rates[2] == doctest::Approx(1.0));

  ElementTriple gg2 = make_triple("GG", 2, tri);
  CHECK(gg2.rotation.dim == 6 * tri.num_cells());
  CHECK(gg2.gamma0 == Gamma0Kind::CellConstant);
  CHECK(gg2.stokes.dim == 5 * tri.num_cells());
  CHECK(gg2.target_rates[0] == doctest::Approx(2.0));

  CHECK_THROWS(make_triple("CGG", 1, tri));
  CHECK_THROWS(make_triple("nonsense", 1, tri));
  CHECK_THROWS(make_triple("BaryBDM", 1, tri));
  CHECK_THROWS(make_triple("Rect2D", 1, tri));
}

TEST_CASE("gamma split orthogonality") {
  Mesh tri = unit_square_triangulation(2);
  Mesh bary = barycentric_subdivide(tri);
  for (auto setup : std::vector<std::pair<const char*, const Mesh*>>{
           {"GG", &tri}, {"AFW", &tri}, {"BaryBDM", &bary}}) {
    ElementTriple t = make_triple(setup.first, setup.first == std::string("GG") ? 2 : 1,
                                  *setup.second);
    auto [g0, g1] = gamma_split(t);
    CHECK(g0.cols() + g1.cols() == t.rotation.dim);
    // Modal rotation spaces have identity mass, so coefficient
    // orthogonality is L2 orthogonality.
    if (g0.cols() > 0) {
      if (g1.cols() > 0) {
        Eigen::MatrixXd cross = g0.transpose() * g1;
        CHECK(cross.cwiseAbs().maxCoeff() < 1e-12);
      }
      Eigen::MatrixXd gram0 = g0.transpose() * g0;
      CHECK((gram0 - Eigen::MatrixXd::Identity(g0.cols(), g0.cols())).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }
  // MacroConstant columns represent macro-cell-wise constants: check one.
  ElementTriple bt = make_triple("BaryBDM", 1, bary);
  auto [g0, g1] = gamma_split(bt);
  CHECK(g0.cols() == tri.num_cells());
  FieldCoefficients f{&bt.rotation, g0.col(0)};
  // The field must be cell-wise constant in r and equal across the
  // children of one macro cell.
  int macro = -1;
  double rval = 0.0;
  bool first = true;
  for (int c = 0; c < bary.num_cells(); ++c) {
    Vec2 g = bary.centroid(c);
    auto v = eval_field(f, c, g);
    if (std::abs(v[1]) > 1e-14) {
      if (first) {
        macro = bary.parent_map[c];
        rval = v[1];
        first = false;
      } else {
        CHECK(bary.parent_map[c] == macro);
        CHECK(v[1] == doctest::Approx(rval));
      }
    }
  }
}

TEST_CASE("identity skw curl = chi div S on Stokes bases") {
  Mesh tri = unit_square_triangulation(2);
  for (const char* name : {"PEERS", "GG", "THB"}) {
    ElementTriple t = make_triple(name, name == std::string("GG") ? 2 : 1, tri);
    IdentityResidual r = discrete_identity_residual(t);
    CHECK(r.pointwise < 1e-12);
    CHECK(r.projected < 1e-12);
  }
}
