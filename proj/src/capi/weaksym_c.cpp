// SPDX-License-Identifier: Apache-2.0
#include "weaksym.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "core/analysis.hpp"
#include "core/mesh.hpp"
#include "core/spaces.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
ws_status guarded(Fn&& fn) {
  try {
    fn();
    return WS_OK;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return WS_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return WS_ERR_RUNTIME;
  }
}

}  // namespace

struct ws_mesh {
  ws::Mesh mesh;
};

struct ws_triple {
  std::shared_ptr<ws_mesh> mesh;  // keeps the mesh alive
  ws::ElementTriple triple;
};

extern "C" {

const char* ws_version(void) { return "1.0.0"; }

const char* ws_last_error(void) { return g_last_error.c_str(); }

void ws_string_free(char* s) { std::free(s); }

ws_mesh* ws_mesh_unit_square_tri(int m) {
  ws_mesh* out = nullptr;
  guarded([&] { out = new ws_mesh{ws::unit_square_triangulation(m)}; });
  return out;
}

ws_mesh* ws_mesh_unit_square_rect(int m) {
  ws_mesh* out = nullptr;
  guarded([&] { out = new ws_mesh{ws::unit_square_rectgrid(m)}; });
  return out;
}

ws_mesh* ws_mesh_refine(const ws_mesh* mesh) {
  if (!mesh) {
    set_error("ws_mesh_refine: null mesh");
    return nullptr;
  }
  ws_mesh* out = nullptr;
  guarded([&] { out = new ws_mesh{ws::refine_uniform(mesh->mesh)}; });
  return out;
}

ws_mesh* ws_mesh_barycentric(const ws_mesh* mesh) {
  if (!mesh) {
    set_error("ws_mesh_barycentric: null mesh");
    return nullptr;
  }
  ws_mesh* out = nullptr;
  guarded([&] { out = new ws_mesh{ws::barycentric_subdivide(mesh->mesh)}; });
  return out;
}

ws_mesh* ws_mesh_from_json(const char* json_text) {
  if (!json_text) {
    set_error("ws_mesh_from_json: null input");
    return nullptr;
  }
  ws_mesh* out = nullptr;
  guarded([&] { out = new ws_mesh{ws::mesh_from_json(json_text)}; });
  return out;
}

ws_status ws_mesh_to_json(const ws_mesh* mesh, char** out_json) {
  if (!mesh || !out_json) {
    set_error("ws_mesh_to_json: null argument");
    return WS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out_json = dup_string(ws::mesh_to_json(mesh->mesh)); });
}

void ws_mesh_free(ws_mesh* mesh) { delete mesh; }

int ws_mesh_num_cells(const ws_mesh* mesh) { return mesh ? mesh->mesh.num_cells() : -1; }
int ws_mesh_num_vertices(const ws_mesh* mesh) { return mesh ? mesh->mesh.num_vertices() : -1; }
int ws_mesh_num_edges(const ws_mesh* mesh) { return mesh ? mesh->mesh.num_edges() : -1; }
double ws_mesh_h_max(const ws_mesh* mesh) { return mesh ? mesh->mesh.h_max() : -1.0; }

ws_status ws_triple_names(char** out_csv) {
  if (!out_csv) {
    set_error("ws_triple_names: null argument");
    return WS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    std::ostringstream os;
    const auto& names = ws::triple_catalogue();
    for (size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
    *out_csv = dup_string(os.str());
  });
}

ws_triple* ws_triple_create(const char* name, int k, const ws_mesh* mesh) {
  if (!name || !mesh) {
    set_error("ws_triple_create: null argument");
    return nullptr;
  }
  ws_triple* out = nullptr;
  guarded([&] {
    // The triple references the mesh; copy it into shared ownership so
    // the caller may free its handle independently.
    auto held = std::make_shared<ws_mesh>(*mesh);
    auto t = std::make_unique<ws_triple>();
    t->mesh = held;
    t->triple = ws::make_triple(name, k, held->mesh);
    out = t.release();
  });
  return out;
}

void ws_triple_free(ws_triple* triple) { delete triple; }

ws_status ws_triple_dims_json(const ws_triple* triple, char** out_json) {
  if (!triple || !out_json) {
    set_error("ws_triple_dims_json: null argument");
    return WS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out_json = dup_string(ws::space_dims_json(triple->triple)); });
}

ws_status ws_certify(const ws_triple* triple, int m, char** out_json) {
  if (!triple || !out_json) {
    set_error("ws_certify: null argument");
    return WS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    ws::StabilityReport rep = ws::certify_triple(triple->triple, m);
    *out_json = dup_string(ws::stability_report_json(rep));
  });
}

ws_status ws_rates(const char* name, int k, const char* case_name, double mu,
                   double lambda, int levels, int with_stability, char** out_json,
                   char** out_csv) {
  if (!name || !case_name) {
    set_error("ws_rates: null argument");
    return WS_ERR_INVALID_ARGUMENT;
  }
  if (levels < 2 || levels > 6) {
    set_error("ws_rates: levels must be in 2..6");
    return WS_ERR_INVALID_ARGUMENT;
  }
  if (mu <= 0.0 || lambda < 0.0) {
    set_error("ws_rates: need mu > 0 and lambda >= 0");
    return WS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    ws::ConvergenceResult res = ws::run_convergence(
        name, k, case_name, ws::Material{mu, lambda}, levels, with_stability != 0);
    if (out_json) *out_json = dup_string(ws::rates_json(res));
    if (out_csv) *out_csv = dup_string(ws::rates_csv(res));
  });
}

ws_status ws_selftest(char** out_log) {
  return guarded([&] {
    std::ostringstream log;
    ws::Mesh tri = ws::unit_square_triangulation(2);
    ws::Mesh rect = ws::unit_square_rectgrid(2);
    ws::Mesh bary = ws::barycentric_subdivide(tri);
    tri.validate();
    rect.validate();
    bary.validate();
    log << "meshes ok\n";
    struct Case {
      const char* name;
      int k;
    };
    const Case cases[] = {{"PEERS", 1}, {"AFW", 1},     {"GG", 1},  {"Stenberg", 1},
                          {"THB", 1},   {"Rect2D", 1},  {"CGG", 2}, {"BaryBDM", 1},
                          {"AwanouLow", 1}, {"rGG", 1}};
    for (const Case& c : cases) {
      const ws::Mesh& mesh = (std::string(c.name) == "Rect2D" ||
                              std::string(c.name) == "AwanouLow" ||
                              std::string(c.name) == "rGG")
                                 ? rect
                                 : (std::string(c.name) == "BaryBDM" ? bary : tri);
      ws::ElementTriple t = ws::make_triple(c.name, c.k, mesh);
      ws::StabilityReport rep = ws::certify_triple(t, 2);
      log << c.name << " k=" << c.k << " beta=" << rep.beta
          << (rep.stable ? " stable" : " UNSTABLE") << "\n";
      if (!rep.stable) throw std::runtime_error(std::string("selftest: ") + c.name +
                                                " failed its stability certificate");
    }
    if (out_log) *out_log = dup_string(log.str());
  });
}

}  // extern "C"
