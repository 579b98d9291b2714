#ifndef ROBIN_SPECTRA_H
#define ROBIN_SPECTRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_PARSE_ERROR = 3,
  RS_STATUS_SOLVER_FAILURE = 4,
  /**
   * The call completed but the answer is "no" (a failed verification).
   */
  RS_STATUS_FAILED = 5,
  RS_STATUS_PANIC = 6,
} RsStatus;

typedef enum RsBoundaryKind {
  RS_BOUNDARY_KIND_DIRICHLET = 0,
  RS_BOUNDARY_KIND_NEUMANN = 1,
  RS_BOUNDARY_KIND_ROBIN = 2,
} RsBoundaryKind;

/**
 * Opaque eigenvalue estimate with its eigenfunction.
 */
typedef struct RsEstimate RsEstimate;

/**
 * Opaque triangulation.
 */
typedef struct RsMesh RsMesh;

/**
 * A boundary condition; `beta` is read only for `Robin`.
 */
typedef struct RsBoundary {
  enum RsBoundaryKind kind;
  double beta;
} RsBoundary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread (empty after a
 * success). Valid until the next call into the library on this thread.
 */
const char *rs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * Principal eigenvalue of `(0, length)`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum RsStatus rs_exact1d(double length,
                         struct RsBoundary left,
                         struct RsBoundary right,
                         struct RsEstimate **out);

/**
 * Principal eigenvalue of the ball of `radius` in dimension `dim`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum RsStatus rs_ball(uint32_t dim,
                      double radius,
                      struct RsBoundary boundary,
                      struct RsEstimate **out);

/**
 * Parse a mesh in the text format read by the CLI.
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out` must be null or
 * valid for writing one pointer.
 */
enum RsStatus rs_mesh_parse(const char *text, struct RsMesh **out);

/**
 * Structured `a × b` rectangle with `res` cells per side, Neumann-tagged.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum RsStatus rs_mesh_rectangle(double a, double b, size_t res, struct RsMesh **out);

/**
 * Disk of `radius` with `res` rings, Neumann-tagged.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum RsStatus rs_mesh_disk(double radius, size_t res, struct RsMesh **out);

/**
 * Annulus `inner < r < outer`, Neumann-tagged.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum RsStatus rs_mesh_annulus(double inner, double outer, size_t res, struct RsMesh **out);

/**
 * Vertex and triangle counts.
 *
 * # Safety
 * `mesh` must be null or a live handle; the out pointers null or writable.
 */
enum RsStatus rs_mesh_size(const struct RsMesh *mesh, size_t *vertices, size_t *triangles);

/**
 * # Safety
 * `mesh` must be null or a handle not yet freed.
 */
void rs_mesh_free(struct RsMesh *mesh);

/**
 * P1 finite-element eigenvalue. With `boundary` null the mesh's own edge
 * tags are used; otherwise the condition applies on the whole boundary.
 *
 * # Safety
 * `mesh` must be a live handle, `boundary` null or readable, `out` null or
 * writable.
 */
enum RsStatus rs_fem(const struct RsMesh *mesh,
                     const struct RsBoundary *boundary,
                     struct RsEstimate **out);

/**
 * # Safety
 * `est` must be null or a live handle; `out` null or writable.
 */
enum RsStatus rs_estimate_sigma(const struct RsEstimate *est, double *out);

/**
 * # Safety
 * `est` must be null or a live handle; `out` null or writable.
 */
enum RsStatus rs_estimate_residual(const struct RsEstimate *est, double *out);

/**
 * Max-normalized eigenfunction of a one-dimensional estimate at `x`.
 *
 * # Safety
 * `est` must be null or a live handle; `out` null or writable.
 */
enum RsStatus rs_estimate_eval(const struct RsEstimate *est, double x, double *out);

/**
 * Eigenfunction of a mesh estimate at the planar point `(x, y)`.
 *
 * # Safety
 * `est` must be null or a live handle; `out` null or writable.
 */
enum RsStatus rs_estimate_eval_xy(const struct RsEstimate *est, double x, double y, double *out);

/**
 * # Safety
 * `est` must be null or a handle not yet freed.
 */
void rs_estimate_free(struct RsEstimate *est);

/**
 * Run the verification suite. Returns `Ok` when every check passes and
 * `Failed` otherwise; the rendered table is available from
 * [`rs_last_error`] in the failing case.
 */
enum RsStatus rs_verify(bool fast);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBIN_SPECTRA_H */
