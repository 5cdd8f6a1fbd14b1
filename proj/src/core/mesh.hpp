// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "quadrature.hpp"

namespace ws {

// Affine 2D mesh of a polygonal domain: triangles (CCW) or axis-aligned
// rectangles.  Immutable after construction; refinement returns a new mesh.
class Mesh {
 public:
  CellType cell_type = CellType::Triangle;
  std::vector<Vec2> vertices;
  // Vertex indices per cell; triangles use the first 3 entries ([3] == -1).
  // Rectangles are stored CCW starting at the lower-left corner.
  std::vector<std::array<int, 4>> cells;
  // Global edges, always oriented from lower to higher vertex index.
  std::vector<std::array<int, 2>> edges;
  // Per cell: global edge index of each local edge, and the orientation
  // sign (+1 if the local traversal runs low -> high vertex index).
  std::vector<std::array<int, 4>> cell_edges;
  std::vector<std::array<int, 4>> cell_edge_sign;
  // Up to two adjacent cells per edge (-1 if boundary).
  std::vector<std::array<int, 2>> edge_cells;
  // Macro-cell index per cell for barycentric meshes, -1 otherwise.
  std::vector<int> parent_map;
  // For barycentric meshes: vertices [0, macro_vertex_count) are macro
  // vertices, the rest are barycenters.  0 when not barycentric.
  int macro_vertex_count = 0;
  std::vector<double> h_per_cell;

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int edges_per_cell() const { return cell_type == CellType::Triangle ? 3 : 4; }
  bool is_barycentric() const { return macro_vertex_count > 0; }

  Vec2 centroid(int cell) const;
  double area(int cell) const;
  double h_max() const;
  double shape_regularity() const;  // max over cells of diameter / inradius

  // Unit tangent of a global edge (low -> high vertex) and the normal
  // obtained by rotating the tangent by -90 degrees.
  Vec2 edge_tangent(int edge) const;
  Vec2 edge_normal(int edge) const;
  double edge_length(int edge) const;

  // Affine map reference cell -> physical cell and its measure factor.
  Vec2 map_to_physical(int cell, Vec2 ref) const;
  double jacobian(int cell) const;  // |det J|, constant per cell

  // Vertex indices of a local edge in traversal order.
  std::array<int, 2> local_edge(int cell, int le) const;

  // Consistency checks for every construction path; throws on violation.
  void validate() const;
};

Mesh unit_square_triangulation(int m);
Mesh unit_square_rectgrid(int m);
Mesh refine_uniform(const Mesh& mesh);
Mesh barycentric_subdivide(const Mesh& mesh);

// Build from raw vertex/cell lists; derives edges and adjacency.
Mesh mesh_from_arrays(CellType type, std::vector<Vec2> vertices,
                      std::vector<std::array<int, 4>> cells);

// JSON interchange: { "cell_type": "tri"|"rect", "vertices": [[x,y],...],
// "cells": [[i,j,k(,l)],...] }.  The loader validates all mesh invariants
// and reports the offending entry on failure.
Mesh mesh_from_json(const std::string& text);
std::string mesh_to_json(const Mesh& mesh);

}  // namespace ws
