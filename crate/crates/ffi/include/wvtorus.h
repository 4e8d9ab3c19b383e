#ifndef WVTORUS_H
#define WVTORUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result codes. `WV_OK` is zero; everything else is an error.
 */
typedef enum WvStatus {
  WV_OK = 0,
  WV_NULL_POINTER = 1,
  WV_INVALID_MEASURE = 2,
  WV_INVALID_MESH = 3,
  WV_MESH_MISMATCH = 4,
  WV_CONSTRAINT_VIOLATION = 5,
  WV_DIRICHLET_VIOLATION = 6,
  WV_COEFFICIENT_BOUNDS = 7,
  WV_NOT_COERCIVE = 8,
  WV_SINGULAR_SYSTEM = 9,
  WV_INCOMPATIBLE_DATA = 10,
  WV_FACTORIZATION_FAILURE = 11,
  WV_GRID_TOO_COARSE = 12,
  WV_DEGENERATE_KERNEL = 13,
  WV_INVALID_ARGUMENT = 14,
  WV_BUFFER_TOO_SMALL = 15,
  WV_INTERNAL = 16,
} WvStatus;

/*
 Continuity class of a measure function.
 */
typedef enum WvContinuity {
  WV_CADLAG = 0,
  WV_CAGLAD = 1,
} WvContinuity;

/*
 Which one-sided value to read.
 */
typedef enum WvSide {
  WV_RIGHT = 0,
  WV_LEFT = 1,
} WvSide;

/*
 Opaque measure function.
 */
typedef struct WvMeasure WvMeasure;

/*
 Opaque mesh (owns references to its two measures).
 */
typedef struct WvMesh WvMesh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *wv_version(void);

/*
 Copies the last error message of this thread into `buf` (truncated,
 always NUL-terminated when `cap > 0`). Returns the full message length.

 # Safety
 `buf` must be valid for `cap` bytes or null with `cap == 0`.
 */
size_t wv_last_error(char *buf, size_t cap);

/*
 Builds a measure function from `n_segments` breakpoints/slopes and
 `n_atoms` atom locations/masses.

 # Safety
 Array arguments must hold the stated number of values; `out` must be
 writable.
 */
enum WvStatus wv_measure_new(enum WvContinuity continuity,
                             const double *breakpoints,
                             const double *slopes,
                             size_t n_segments,
                             const double *atom_x,
                             const double *atom_mass,
                             size_t n_atoms,
                             struct WvMeasure **out_measure);

/*
 # Safety
 `measure` must come from [`wv_measure_new`] and not be used afterwards.
 */
void wv_measure_free(struct WvMeasure *measure);

/*
 `F(x)` or `F(x−)`.

 # Safety
 `measure` must be a live handle and `value` writable.
 */
enum WvStatus wv_measure_eval(const struct WvMeasure *measure,
                              double x,
                              enum WvSide which,
                              double *value);

/*
 `F(1) − F(0)`.

 # Safety
 `measure` must be a live handle and `value` writable.
 */
enum WvStatus wv_measure_total(const struct WvMeasure *measure, double *value);

/*
 `W(t∧s)` for the motion, `W(t∧s) − W(t)W(s)/W(1)` for the bridge.

 # Safety
 `w` must be a live handle and `value` writable.
 */
enum WvStatus wv_covariance(const struct WvMeasure *w,
                            double t,
                            double s,
                            bool bridge,
                            double *value);

/*
 Uniform mesh with `n` cells refined by all atoms of `w` and `v`.

 # Safety
 `w`, `v` must be live handles and `out_mesh` writable.
 */
enum WvStatus wv_mesh_new(const struct WvMeasure *w,
                          const struct WvMeasure *v,
                          size_t n,
                          struct WvMesh **out_mesh);

/*
 # Safety
 `mesh` must come from [`wv_mesh_new`] and not be used afterwards.
 */
void wv_mesh_free(struct WvMesh *mesh);

/*
 Number of cells `N`; node arrays have `N + 1` entries (closing point 1
 included).

 # Safety
 `mesh` must be a live handle and `n_cells` writable.
 */
enum WvStatus wv_mesh_cells(const struct WvMesh *mesh, size_t *n_cells);

/*
 Node coordinates `x_0 … x_N` into `points` (capacity `cap ≥ N + 1`).

 # Safety
 `mesh` must be a live handle; `points` valid for `cap` values.
 */
enum WvStatus wv_mesh_points(const struct WvMesh *mesh, double *points, size_t cap);

/*
 The `k` smallest eigenvalues of `−D⁺_V(a·D⁻_W ·)` (`full == false`) or of
 `κ² − D⁺_V(a·D⁻_W ·)` with constant coefficients, periodic or Dirichlet.
 Writes `min(k, basis size)` values and their count.

 # Safety
 `mesh` must be a live handle; `values` valid for `cap` values; `count`
 writable.
 */
enum WvStatus wv_eigenvalues(const struct WvMesh *mesh,
                             double a,
                             double kappa2,
                             bool full,
                             bool dirichlet,
                             size_t k,
                             double *values,
                             size_t cap,
                             size_t *count);

/*
 Periodic eigenvalues in `(0, lambda_max]` from the monodromy matrix,
 listed with multiplicity.

 # Safety
 `w`, `v` must be live handles; `values` valid for `cap` values; `count`
 writable.
 */
enum WvStatus wv_shooting_eigenvalues(const struct WvMeasure *w,
                                      const struct WvMeasure *v,
                                      double lambda_max,
                                      size_t grid_points,
                                      double *values,
                                      size_t cap,
                                      size_t *count);

/*
 One seeded W-Brownian motion (or bridge) on the mesh nodes:
 `right[i] = B(x_i)`, `left[i] = B(x_i−)`, `i = 0..=N`.

 # Safety
 `mesh` must be a live handle; `right` and `left` valid for `cap` values.
 */
enum WvStatus wv_sample_path(const struct WvMesh *mesh,
                             uint64_t seed,
                             uint64_t path_id,
                             bool bridge,
                             double *right,
                             double *left,
                             size_t cap);

/*
 Nodal values `u(x_0) … u(x_{N−1})` of the solution of
 `κ²u − D⁺_V(h·D⁻_W u) = Ḃ_W`, `u(0) = 0`, for one noise path.

 # Safety
 `mesh` must be a live handle; `u` valid for `cap` values.
 */
enum WvStatus wv_spde_solve(const struct WvMesh *mesh,
                            double kappa2,
                            double h,
                            uint64_t seed,
                            uint64_t path_id,
                            double *u,
                            size_t cap);

/*
 Numeric value of a status code, for bindings without enum support.
 */
int wv_status_code(enum WvStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WVTORUS_H */
