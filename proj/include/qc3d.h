/*
 * qc3d: volumetric quasiconformal mapping toolkit, C API.
 *
 * Opaque handles + status codes over the C++ core. Every function returns
 * QC3D_OK or an error status; qc3d_last_error() gives a thread-local message
 * for the most recent failure on the calling thread. Strings returned through
 * char** out-parameters are heap-allocated and must be released with
 * qc3d_string_free().
 *
 * Handle lifetimes are reference-safe: a mapping keeps its mesh alive even if
 * the mesh handle is freed first.
 */
#ifndef QC3D_H
#define QC3D_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define QC3D_API __declspec(dllexport)
#else
#  define QC3D_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qc3d_status {
    QC3D_OK = 0,
    QC3D_ERR_INVALID = 1, /* invalid argument / failed validation */
    QC3D_ERR_PARSE = 2,   /* malformed input file */
    QC3D_ERR_IO = 3,      /* file system failure */
    QC3D_ERR_NUMERIC = 4, /* numerical failure (folds, non-convergence, ...) */
} qc3d_status;

typedef struct qc3d_mesh qc3d_mesh;
typedef struct qc3d_mapping qc3d_mapping;
typedef struct qc3d_rep qc3d_rep;           /* per-tet 6-vector representation */
typedef struct qc3d_bc qc3d_bc;             /* per-coordinate Dirichlet data */
typedef struct qc3d_spectrum qc3d_spectrum; /* Laplace-Beltrami eigenpairs */
typedef struct qc3d_compressed qc3d_compressed;

QC3D_API const char* qc3d_last_error(void);
QC3D_API void qc3d_string_free(char* s);

/* Solver options; pass NULL anywhere a qc3d_solve_opts* is accepted to get
 * the defaults (tol 1e-12, max_iter 10n, 1 thread). */
typedef struct qc3d_solve_opts {
    double tol;
    long max_iter; /* -1 selects 10 * n */
    int threads;
} qc3d_solve_opts;

QC3D_API void qc3d_solve_opts_default(qc3d_solve_opts* opts);

/* --- meshes and mappings ------------------------------------------------- */

QC3D_API qc3d_status qc3d_mesh_load_tetgen(const char* node_path, const char* ele_path, qc3d_mesh** out);
QC3D_API qc3d_status qc3d_mesh_load_json(const char* path, qc3d_mesh** out);
QC3D_API qc3d_status qc3d_mesh_save_json(const qc3d_mesh* mesh, const qc3d_mapping* images_or_null,
                                         const char* path);
QC3D_API qc3d_status qc3d_mesh_save_tetgen(const qc3d_mesh* mesh, const char* node_path, const char* ele_path);
QC3D_API uint64_t qc3d_mesh_vertex_count(const qc3d_mesh* mesh);
QC3D_API uint64_t qc3d_mesh_tet_count(const qc3d_mesh* mesh);
QC3D_API uint64_t qc3d_mesh_content_hash(const qc3d_mesh* mesh);
QC3D_API qc3d_status qc3d_mesh_vertex(const qc3d_mesh* mesh, uint64_t index, double xyz[3]);
/* JSON: {vertices, tets, volume_total, volume_min, volume_max, repaired_tets,
 *        boundary_vertices} */
QC3D_API qc3d_status qc3d_mesh_validate_report(const qc3d_mesh* mesh, char** report_json);
QC3D_API void qc3d_mesh_free(qc3d_mesh* mesh);

QC3D_API qc3d_status qc3d_mapping_load_node(const qc3d_mesh* mesh, const char* node_path, qc3d_mapping** out);
QC3D_API qc3d_status qc3d_mapping_identity(const qc3d_mesh* mesh, qc3d_mapping** out);
QC3D_API qc3d_status qc3d_mapping_save_node(const qc3d_mapping* mapping, const char* path);
QC3D_API qc3d_status qc3d_mapping_image(const qc3d_mapping* mapping, uint64_t index, double xyz[3]);
/* JSON: {diffeomorphic, folded_tets, det_min, det_max} */
QC3D_API qc3d_status qc3d_mapping_check(const qc3d_mapping* mapping, char** report_json);
QC3D_API qc3d_status qc3d_mapping_l2_error(const qc3d_mapping* a, const qc3d_mapping* b, double* out);
QC3D_API void qc3d_mapping_free(qc3d_mapping* mapping);

/* --- representation (Algorithm 1) ----------------------------------------- */

/* permissive != 0 lets orientation-reversed tets through (reported when
 * folded_json is non-NULL); otherwise folds are QC3D_ERR_NUMERIC. */
QC3D_API qc3d_status qc3d_rep_compute(const qc3d_mapping* mapping, int permissive, int threads,
                                      qc3d_rep** out, char** folded_json);
QC3D_API uint64_t qc3d_rep_tet_count(const qc3d_rep* rep);
QC3D_API qc3d_status qc3d_rep_get(const qc3d_rep* rep, uint64_t tet, double q[6]);
QC3D_API qc3d_status qc3d_rep_identity(uint64_t tet_count, qc3d_rep** out);
/* q_t = (1-t) identity + t q, SPD for t in [0, 1]. */
QC3D_API qc3d_status qc3d_rep_interpolate(const qc3d_rep* rep, double t, qc3d_rep** out);
QC3D_API qc3d_status qc3d_rep_save(const qc3d_rep* rep, const char* path);
QC3D_API qc3d_status qc3d_rep_load(const char* path, qc3d_rep** out);
QC3D_API void qc3d_rep_free(qc3d_rep* rep);

/* --- boundary conditions --------------------------------------------------- */

QC3D_API qc3d_status qc3d_bc_create(qc3d_bc** out);
/* coord: 0 = u, 1 = v, 2 = w. */
QC3D_API qc3d_status qc3d_bc_fix(qc3d_bc* bc, int coord, uint64_t vertex, double value);
/* Unit-cube face conditions: every vertex on a face plane {0,1} of the unit
 * cube keeps its on-plane coordinate(s). */
QC3D_API qc3d_status qc3d_bc_cube_faces(qc3d_bc* bc, const qc3d_mesh* mesh, double tol);
/* Constrain u, v, w of every topological boundary vertex to its image under
 * `mapping`, blended toward the source by (1-t); t = 1 gives exact images. */
QC3D_API qc3d_status qc3d_bc_boundary_blend(qc3d_bc* bc, const qc3d_mapping* mapping, double t);
QC3D_API qc3d_status qc3d_bc_count(const qc3d_bc* bc, int coord, uint64_t* out);
QC3D_API void qc3d_bc_free(qc3d_bc* bc);

/* --- reconstruction (Algorithm 2) ------------------------------------------ */

/* report JSON: {error_l2: null, cg_iters: [u,v,w], max_flux_residual}; the
 * caller fills error_l2 when ground truth exists (see qc3d_mapping_l2_error). */
QC3D_API qc3d_status qc3d_reconstruct(const qc3d_mesh* mesh, const qc3d_rep* rep, const qc3d_bc* bc,
                                      const qc3d_solve_opts* opts, qc3d_mapping** out, char** report_json);

/* MatrixMarket export for oracle cross-checks: writes <prefix>_C.mtx (the
 * assembled generalized Laplacian) and <prefix>_{u,v,w}.mtx (the masked
 * systems under `bc`). */
QC3D_API qc3d_status qc3d_export_system_matrices(const qc3d_mesh* mesh, const qc3d_rep* rep,
                                                 const qc3d_bc* bc, const char* path_prefix);

/* --- spectral compression --------------------------------------------------- */

QC3D_API qc3d_status qc3d_spectrum_compute(const qc3d_mesh* mesh, uint64_t k, qc3d_spectrum** out);
QC3D_API uint64_t qc3d_spectrum_count(const qc3d_spectrum* sp);
QC3D_API qc3d_status qc3d_spectrum_eigenvalue(const qc3d_spectrum* sp, uint64_t i, double* out);
QC3D_API qc3d_status qc3d_spectrum_save(const qc3d_spectrum* sp, const char* path);
QC3D_API qc3d_status qc3d_spectrum_load(const char* path, qc3d_spectrum** out);
/* CSV rows "index,lambda,xi_1..xi_6" for the mapping's representation
 * projected onto the spectrum (the spectrum/MSE chart data). */
QC3D_API qc3d_status qc3d_spectrum_table_csv(const qc3d_spectrum* sp, const qc3d_mapping* mapping_or_null,
                                             char** csv);
QC3D_API void qc3d_spectrum_free(qc3d_spectrum* sp);

QC3D_API qc3d_status qc3d_compress(const qc3d_mapping* mapping, const qc3d_spectrum* sp, uint64_t threshold,
                                   const qc3d_bc* bc, qc3d_compressed** out);
QC3D_API qc3d_status qc3d_compressed_save(const qc3d_compressed* c, const char* path);
QC3D_API qc3d_status qc3d_compressed_load(const char* path, qc3d_compressed** out);
QC3D_API uint64_t qc3d_compressed_threshold(const qc3d_compressed* c);
/* Tail energy sum_{i>T} xi_i^2 totalled over the six components: the M-norm
 * truncation error of keeping the first T coefficients. */
QC3D_API qc3d_status qc3d_compressed_tail_energy(const qc3d_mapping* mapping, const qc3d_spectrum* sp,
                                                 uint64_t threshold, double* out);
/* report JSON: {clamped_tets, cg_iters, max_flux_residual} */
QC3D_API qc3d_status qc3d_decompress(const qc3d_compressed* c, const qc3d_mesh* mesh, const qc3d_spectrum* sp,
                                     const qc3d_solve_opts* opts, qc3d_mapping** out, char** report_json);
QC3D_API void qc3d_compressed_free(qc3d_compressed* c);

/* --- keyframe interpolation -------------------------------------------------- */

/* Reconstructs `frames` uniformly spaced mappings (t = 0 .. 1), writes
 * frame_###.node files into out_dir, and returns the run manifest JSON
 * (schedule, per-frame fold counts, solver stats). landmarks_path (optional)
 * is a vertex-index file; landmark_mode 0 = endpoints only, 1 = every frame. */
QC3D_API qc3d_status qc3d_interp_frames(const qc3d_mapping* mapping, int frames, const char* landmarks_path,
                                        int landmark_mode, const qc3d_solve_opts* opts, uint64_t seed,
                                        const char* out_dir, char** manifest_json);

/* Poisson-disk seeding utility: normalizes the surface vertices from
 * surface_node into [margin, 1-margin]^3, samples the unit cube with radius
 * sigma, filters by Prob(p) = min(1, d/sigma) exp(-kappa d) and writes the
 * kept points (surface vertices first) to out_node. */
QC3D_API qc3d_status qc3d_seed_points(const char* surface_node, const char* out_node, double sigma,
                                      double kappa, uint64_t seed, char** report_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QC3D_H */
