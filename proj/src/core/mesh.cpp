// SPDX-License-Identifier: Apache-2.0
#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace ws {

namespace {

double triangle_area(Vec2 a, Vec2 b, Vec2 c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

Vec2 Mesh::centroid(int cell) const {
  int n = cell_type == CellType::Triangle ? 3 : 4;
  Vec2 c{0.0, 0.0};
  for (int i = 0; i < n; ++i) c = c + vertices[cells[cell][i]];
  return c * (1.0 / n);
}

double Mesh::area(int cell) const {
  const auto& cv = cells[cell];
  if (cell_type == CellType::Triangle)
    return triangle_area(vertices[cv[0]], vertices[cv[1]], vertices[cv[2]]);
  return triangle_area(vertices[cv[0]], vertices[cv[1]], vertices[cv[2]]) +
         triangle_area(vertices[cv[0]], vertices[cv[2]], vertices[cv[3]]);
}

double Mesh::h_max() const {
  double h = 0.0;
  for (double hc : h_per_cell) h = std::max(h, hc);
  return h;
}

double Mesh::shape_regularity() const {
  double worst = 0.0;
  for (int c = 0; c < num_cells(); ++c) {
    double inradius;
    if (cell_type == CellType::Triangle) {
      const auto& cv = cells[c];
      double per = (vertices[cv[1]] - vertices[cv[0]]).norm() +
                   (vertices[cv[2]] - vertices[cv[1]]).norm() +
                   (vertices[cv[0]] - vertices[cv[2]]).norm();
      inradius = 2.0 * area(c) / per;
    } else {
      const auto& cv = cells[c];
      double w = (vertices[cv[1]] - vertices[cv[0]]).norm();
      double ht = (vertices[cv[3]] - vertices[cv[0]]).norm();
      inradius = 0.5 * std::min(w, ht);
    }
    worst = std::max(worst, h_per_cell[c] / inradius);
  }
  return worst;
}

Vec2 Mesh::edge_tangent(int edge) const {
  Vec2 d = vertices[edges[edge][1]] - vertices[edges[edge][0]];
  return d * (1.0 / d.norm());
}

Vec2 Mesh::edge_normal(int edge) const {
  Vec2 t = edge_tangent(edge);
  return {t.y, -t.x};
}

double Mesh::edge_length(int edge) const {
  return (vertices[edges[edge][1]] - vertices[edges[edge][0]]).norm();
}

Vec2 Mesh::map_to_physical(int cell, Vec2 ref) const {
  const auto& cv = cells[cell];
  Vec2 v0 = vertices[cv[0]];
  Vec2 e1 = vertices[cv[1]] - v0;
  Vec2 e2 = (cell_type == CellType::Triangle ? vertices[cv[2]]
                                             : vertices[cv[3]]) -
            v0;
  return v0 + ref.x * e1 + ref.y * e2;
}

double Mesh::jacobian(int cell) const {
  return cell_type == CellType::Triangle ? 2.0 * area(cell) : area(cell);
}

std::array<int, 2> Mesh::local_edge(int cell, int le) const {
  int n = edges_per_cell();
  return {cells[cell][le], cells[cell][(le + 1) % n]};
}

void Mesh::validate() const {
  int nv = num_vertices();
  for (int c = 0; c < num_cells(); ++c) {
    int n = edges_per_cell();
    for (int i = 0; i < n; ++i) {
      int v = cells[c][i];
      if (v < 0 || v >= nv)
        throw std::runtime_error("mesh: cells[" + std::to_string(c) +
                                 "] references invalid vertex " +
                                 std::to_string(v));
    }
    if (area(c) <= 0.0)
      throw std::runtime_error("mesh: cells[" + std::to_string(c) +
                               "] has non-positive area");
    if (cell_type == CellType::Rectangle) {
      const auto& cv = cells[c];
      Vec2 d1 = vertices[cv[1]] - vertices[cv[0]];
      Vec2 d2 = vertices[cv[3]] - vertices[cv[0]];
      Vec2 d3 = vertices[cv[2]] - vertices[cv[1]];
      if (std::abs(d1.y) > 1e-12 || std::abs(d2.x) > 1e-12 ||
          (d3 - d2).norm() > 1e-12)
        throw std::runtime_error("mesh: cells[" + std::to_string(c) +
                                 "] is not an axis-aligned rectangle");
    }
  }
  for (int e = 0; e < num_edges(); ++e) {
    int count = (edge_cells[e][0] >= 0 ? 1 : 0) + (edge_cells[e][1] >= 0 ? 1 : 0);
    if (count < 1 || count > 2)
      throw std::runtime_error("mesh: edges[" + std::to_string(e) +
                               "] shared by " + std::to_string(count) +
                               " cells");
    if (edges[e][0] >= edges[e][1])
      throw std::runtime_error("mesh: edges[" + std::to_string(e) +
                               "] not oriented low -> high");
  }
}

Mesh mesh_from_arrays(CellType type, std::vector<Vec2> vertices,
                      std::vector<std::array<int, 4>> cells) {
  Mesh m;
  m.cell_type = type;
  m.vertices = std::move(vertices);
  m.cells = std::move(cells);
  int nper = m.edges_per_cell();

  std::map<std::pair<int, int>, int> edge_of;
  for (int c = 0; c < m.num_cells(); ++c) {
    std::array<int, 4> ce{-1, -1, -1, -1}, cs{0, 0, 0, 0};
    for (int le = 0; le < nper; ++le) {
      auto [a, b] = m.local_edge(c, le);
      if (a == b)
        throw std::runtime_error("mesh: cells[" + std::to_string(c) +
                                 "] has a degenerate edge");
      int lo = std::min(a, b), hi = std::max(a, b);
      auto key = std::make_pair(lo, hi);
      auto it = edge_of.find(key);
      int e;
      if (it == edge_of.end()) {
        e = m.num_edges();
        edge_of.emplace(key, e);
        m.edges.push_back({lo, hi});
        m.edge_cells.push_back({c, -1});
      } else {
        e = it->second;
        if (m.edge_cells[e][1] >= 0)
          throw std::runtime_error("mesh: edges[" + std::to_string(e) +
                                   "] shared by more than 2 cells");
        m.edge_cells[e][1] = c;
      }
      ce[le] = e;
      cs[le] = (a == lo) ? 1 : -1;
    }
    m.cell_edges.push_back(ce);
    m.cell_edge_sign.push_back(cs);
  }

  m.parent_map.assign(m.num_cells(), -1);
  m.h_per_cell.resize(m.num_cells());
  for (int c = 0; c < m.num_cells(); ++c) {
    double h = 0.0;
    for (int i = 0; i < nper; ++i)
      for (int j = i + 1; j < nper; ++j)
        h = std::max(h, (m.vertices[m.cells[c][i]] - m.vertices[m.cells[c][j]]).norm());
    m.h_per_cell[c] = h;
  }
  m.validate();
  return m;
}

Mesh unit_square_triangulation(int m) {
  if (m < 1) throw std::invalid_argument("unit_square_triangulation: m must be >= 1");
  std::vector<Vec2> verts;
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i)
      verts.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
  auto vid = [m](int i, int j) { return j * (m + 1) + i; };
  std::vector<std::array<int, 4>> cells;
  // Each square split along the lower-left to upper-right diagonal.
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), -1});
      cells.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), -1});
    }
  Mesh mesh = mesh_from_arrays(CellType::Triangle, std::move(verts), std::move(cells));
  if (mesh.shape_regularity() > 10.0)
    throw std::runtime_error("unit_square_triangulation: shape regularity bound violated");
  return mesh;
}

Mesh unit_square_rectgrid(int m) {
  if (m < 1) throw std::invalid_argument("unit_square_rectgrid: m must be >= 1");
  std::vector<Vec2> verts;
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i)
      verts.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
  auto vid = [m](int i, int j) { return j * (m + 1) + i; };
  std::vector<std::array<int, 4>> cells;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  Mesh mesh = mesh_from_arrays(CellType::Rectangle, std::move(verts), std::move(cells));
  if (mesh.shape_regularity() > 10.0)
    throw std::runtime_error("unit_square_rectgrid: shape regularity bound violated");
  return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Vec2> verts = mesh.vertices;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int id = static_cast<int>(verts.size());
    verts.push_back((mesh.vertices[a] + mesh.vertices[b]) * 0.5);
    midpoint.emplace(key, id);
    return id;
  };

  std::vector<std::array<int, 4>> cells;
  std::vector<int> parent;
  if (mesh.cell_type == CellType::Triangle) {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      int v0 = mesh.cells[c][0], v1 = mesh.cells[c][1], v2 = mesh.cells[c][2];
      int m01 = mid(v0, v1), m12 = mid(v1, v2), m20 = mid(v2, v0);
      cells.push_back({v0, m01, m20, -1});
      cells.push_back({m01, v1, m12, -1});
      cells.push_back({m20, m12, v2, -1});
      cells.push_back({m01, m12, m20, -1});
      for (int i = 0; i < 4; ++i) parent.push_back(c);
    }
  } else {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      int v0 = mesh.cells[c][0], v1 = mesh.cells[c][1], v2 = mesh.cells[c][2],
          v3 = mesh.cells[c][3];
      int m01 = mid(v0, v1), m12 = mid(v1, v2), m23 = mid(v2, v3), m30 = mid(v3, v0);
      int ctr = static_cast<int>(verts.size());
      verts.push_back((mesh.vertices[v0] + mesh.vertices[v2]) * 0.5);
      cells.push_back({v0, m01, ctr, m30});
      cells.push_back({m01, v1, m12, ctr});
      cells.push_back({ctr, m12, v2, m23});
      cells.push_back({m30, ctr, m23, v3});
      for (int i = 0; i < 4; ++i) parent.push_back(c);
    }
  }
  Mesh out = mesh_from_arrays(mesh.cell_type, std::move(verts), std::move(cells));
  out.parent_map = std::move(parent);
  return out;
}

Mesh barycentric_subdivide(const Mesh& mesh) {
  if (mesh.cell_type != CellType::Triangle)
    throw std::invalid_argument("barycentric_subdivide: requires a triangular mesh");
  std::vector<Vec2> verts = mesh.vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<int> parent;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    int b = static_cast<int>(verts.size());
    verts.push_back(mesh.centroid(c));
    for (int i = 0; i < 3; ++i) {
      cells.push_back({mesh.cells[c][i], mesh.cells[c][(i + 1) % 3], b, -1});
      parent.push_back(c);
    }
  }
  Mesh out = mesh_from_arrays(CellType::Triangle, std::move(verts), std::move(cells));
  out.parent_map = std::move(parent);
  out.macro_vertex_count = mesh.num_vertices();
  return out;
}

Mesh mesh_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("mesh json: parse error at byte ") +
                             std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.contains("cell_type") || !j["cell_type"].is_string())
    throw std::runtime_error("mesh json: missing string field 'cell_type'");
  std::string ct = j["cell_type"].get<std::string>();
  CellType type;
  if (ct == "tri")
    type = CellType::Triangle;
  else if (ct == "rect")
    type = CellType::Rectangle;
  else
    throw std::runtime_error("mesh json: cell_type must be 'tri' or 'rect', got '" + ct + "'");

  if (!j.contains("vertices") || !j["vertices"].is_array())
    throw std::runtime_error("mesh json: missing array field 'vertices'");
  std::vector<Vec2> verts;
  for (size_t i = 0; i < j["vertices"].size(); ++i) {
    const auto& v = j["vertices"][i];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw std::runtime_error("mesh json: vertices[" + std::to_string(i) +
                               "] must be a pair of numbers");
    verts.push_back({v[0].get<double>(), v[1].get<double>()});
  }

  if (!j.contains("cells") || !j["cells"].is_array())
    throw std::runtime_error("mesh json: missing array field 'cells'");
  size_t want = type == CellType::Triangle ? 3 : 4;
  std::vector<std::array<int, 4>> cells;
  for (size_t i = 0; i < j["cells"].size(); ++i) {
    const auto& c = j["cells"][i];
    if (!c.is_array() || c.size() != want)
      throw std::runtime_error("mesh json: cells[" + std::to_string(i) + "] must have " +
                               std::to_string(want) + " vertex indices");
    std::array<int, 4> cv{-1, -1, -1, -1};
    for (size_t q = 0; q < want; ++q) {
      if (!c[q].is_number_integer())
        throw std::runtime_error("mesh json: cells[" + std::to_string(i) +
                                 "] has a non-integer entry");
      cv[q] = c[q].get<int>();
    }
    cells.push_back(cv);
  }
  return mesh_from_arrays(type, std::move(verts), std::move(cells));
}

std::string mesh_to_json(const Mesh& mesh) {
  nlohmann::json j;
  j["cell_type"] = mesh.cell_type == CellType::Triangle ? "tri" : "rect";
  auto verts = nlohmann::json::array();
  for (const auto& v : mesh.vertices) verts.push_back({v.x, v.y});
  j["vertices"] = std::move(verts);
  auto cells = nlohmann::json::array();
  int n = mesh.edges_per_cell();
  for (const auto& c : mesh.cells) {
    auto cc = nlohmann::json::array();
    for (int i = 0; i < n; ++i) cc.push_back(c[i]);
    cells.push_back(std::move(cc));
  }
  j["cells"] = std::move(cells);
  return j.dump();
}

}  // namespace ws
