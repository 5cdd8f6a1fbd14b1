/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the weakly symmetric stress elasticity library.
 *
 * All functions return ws_status (0 on success) or a non-NULL handle;
 * on failure, ws_last_error() returns a thread-local message. Strings
 * returned through char** are heap-allocated; release them with
 * ws_string_free().
 */
#ifndef WEAKSYM_H
#define WEAKSYM_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  WS_OK = 0,
  WS_ERR_INVALID_ARGUMENT = 1,
  WS_ERR_RUNTIME = 2
} ws_status;

typedef struct ws_mesh ws_mesh;
typedef struct ws_triple ws_triple;

const char* ws_version(void);

/* Thread-local message describing the most recent failure. */
const char* ws_last_error(void);
void ws_string_free(char* s);

/* --- meshes --------------------------------------------------------- */

ws_mesh* ws_mesh_unit_square_tri(int m);
ws_mesh* ws_mesh_unit_square_rect(int m);
ws_mesh* ws_mesh_refine(const ws_mesh* mesh);
ws_mesh* ws_mesh_barycentric(const ws_mesh* mesh);
ws_mesh* ws_mesh_from_json(const char* json_text);
ws_status ws_mesh_to_json(const ws_mesh* mesh, char** out_json);
void ws_mesh_free(ws_mesh* mesh);

int ws_mesh_num_cells(const ws_mesh* mesh);
int ws_mesh_num_vertices(const ws_mesh* mesh);
int ws_mesh_num_edges(const ws_mesh* mesh);
double ws_mesh_h_max(const ws_mesh* mesh);

/* --- element triples -------------------------------------------------- */

/* Comma-separated catalogue of known triple names. */
ws_status ws_triple_names(char** out_csv);

ws_triple* ws_triple_create(const char* name, int k, const ws_mesh* mesh);
void ws_triple_free(ws_triple* triple);
ws_status ws_triple_dims_json(const ws_triple* triple, char** out_json);

/* --- analysis --------------------------------------------------------- */

/* Stability certificate of a triple on its mesh (JSON report). */
ws_status ws_certify(const ws_triple* triple, int m, char** out_json);

/* Convergence study against a manufactured solution.
 * case_name: "default" or "divfree". Either output may be NULL. */
ws_status ws_rates(const char* name, int k, const char* case_name, double mu,
                   double lambda, int levels, int with_stability, char** out_json,
                   char** out_csv);

/* Quick internal consistency run (small meshes); 0 if everything passes. */
ws_status ws_selftest(char** out_log);

#ifdef __cplusplus
}
#endif

#endif /* WEAKSYM_H */
