// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "core/mesh.hpp"

using namespace ws;

namespace {

double total_area(const Mesh& m) {
  double a = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) a += m.area(c);
  return a;
}

// Canonical multiset of cell centroids, for mesh comparison up to
// vertex/cell reordering.
std::multiset<std::pair<long long, long long>> centroid_key(const Mesh& m) {
  std::multiset<std::pair<long long, long long>> key;
  for (int c = 0; c < m.num_cells(); ++c) {
    Vec2 g = m.centroid(c);
    key.insert({std::llround(g.x * 1e12), std::llround(g.y * 1e12)});
  }
  return key;
}

bool point_in_triangle(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  auto cross = [](Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; };
  double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
  double tol = -1e-12;
  return d1 >= tol && d2 >= tol && d3 >= tol;
}

}  // namespace

TEST_CASE("unit square triangulation counts") {
  Mesh m1 = unit_square_triangulation(1);
  CHECK(m1.num_cells() == 2);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_edges() == 5);

  Mesh m2 = unit_square_triangulation(2);
  CHECK(m2.num_cells() == 8);
  CHECK(m2.num_vertices() == 9);
  CHECK(m2.num_edges() == 16);

  Mesh m4 = unit_square_triangulation(4);
  CHECK(m4.num_cells() == 32);
  CHECK(m4.num_vertices() == 25);
  for (int c = 0; c < m4.num_cells(); ++c)
    CHECK(m4.area(c) == doctest::Approx(1.0 / 32.0).epsilon(1e-14));

  CHECK_THROWS(unit_square_triangulation(0));
  CHECK(m2.shape_regularity() <= 10.0);
}

TEST_CASE("rect grid counts") {
  Mesh m1 = unit_square_rectgrid(1);
  CHECK(m1.num_cells() == 1);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_edges() == 4);

  Mesh m3 = unit_square_rectgrid(3);
  CHECK(m3.num_cells() == 9);
  CHECK(m3.num_vertices() == 16);
  CHECK(m3.num_edges() == 24);
  for (int c = 0; c < m3.num_cells(); ++c)
    CHECK(m3.h_per_cell[c] == doctest::Approx(std::sqrt(2.0) / 3.0));
  CHECK_THROWS(unit_square_rectgrid(0));
}

TEST_CASE("uniform refinement") {
  Mesh m = unit_square_triangulation(1);
  Mesh r = refine_uniform(m);
  CHECK(r.num_cells() == 8);
  CHECK(r.h_max() == doctest::Approx(m.h_max() / 2.0));

  Mesh rr = refine_uniform(r);
  Mesh m4 = unit_square_triangulation(4);
  CHECK(centroid_key(rr) == centroid_key(m4));

  // Nesting: children lie inside their parent.
  for (int c = 0; c < r.num_cells(); ++c) {
    int p = r.parent_map[c];
    REQUIRE(p >= 0);
    Vec2 a = m.vertices[m.cells[p][0]];
    Vec2 b = m.vertices[m.cells[p][1]];
    Vec2 cc = m.vertices[m.cells[p][2]];
    for (int v = 0; v < 3; ++v)
      CHECK(point_in_triangle(r.vertices[r.cells[c][v]], a, b, cc));
  }

  Mesh rect = refine_uniform(unit_square_rectgrid(2));
  CHECK(rect.num_cells() == 16);
  CHECK(total_area(rect) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("barycentric subdivision") {
  Mesh m = unit_square_triangulation(1);
  Mesh b = barycentric_subdivide(m);
  CHECK(b.num_cells() == 6);
  CHECK(b.num_vertices() == 6);
  CHECK(b.is_barycentric());
  CHECK(b.macro_vertex_count == 4);
  for (int c = 0; c < b.num_cells(); ++c) {
    int p = b.parent_map[c];
    REQUIRE(p >= 0);
    CHECK(b.area(c) == doctest::Approx(m.area(p) / 3.0).epsilon(1e-13));
  }
  CHECK(b.shape_regularity() <= 3.0 * m.shape_regularity());
  CHECK_THROWS(barycentric_subdivide(unit_square_rectgrid(2)));
}

TEST_CASE("edge orientation and adjacency") {
  Mesh m = unit_square_triangulation(3);
  for (int e = 0; e < m.num_edges(); ++e) CHECK(m.edges[e][0] < m.edges[e][1]);
  // Interior edges have two cells traversing in opposite directions.
  for (int e = 0; e < m.num_edges(); ++e) {
    int c0 = m.edge_cells[e][0], c1 = m.edge_cells[e][1];
    if (c1 < 0) continue;
    int s0 = 0, s1 = 0;
    for (int le = 0; le < 3; ++le) {
      if (m.cell_edges[c0][le] == e) s0 = m.cell_edge_sign[c0][le];
      if (m.cell_edges[c1][le] == e) s1 = m.cell_edge_sign[c1][le];
    }
    CHECK(s0 * s1 == -1);
  }
  CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("json round trip and validation") {
  Mesh m = unit_square_triangulation(2);
  std::string txt = mesh_to_json(m);
  Mesh back = mesh_from_json(txt);
  CHECK(back.num_cells() == m.num_cells());
  CHECK(back.num_edges() == m.num_edges());
  CHECK(centroid_key(back) == centroid_key(m));

  CHECK_THROWS(mesh_from_json("{"));
  CHECK_THROWS(mesh_from_json(R"({"cell_type":"tri","vertices":[[0,0],[1,0]],"cells":[[0,1,5]]})"));
  // Inverted (clockwise) triangle rejected.
  CHECK_THROWS(mesh_from_json(
      R"({"cell_type":"tri","vertices":[[0,0],[1,0],[0,1]],"cells":[[0,2,1]]})"));
  // Non-axis-aligned "rectangle" rejected.
  CHECK_THROWS(mesh_from_json(
      R"({"cell_type":"rect","vertices":[[0,0],[1,0.1],[1,1],[0,1]],"cells":[[0,1,2,3]]})"));
}
