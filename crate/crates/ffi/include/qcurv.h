/* C interface for the qcurv numerical laboratory.  Generated by cbindgen; do not edit. */

#ifndef QCURV_H
#define QCURV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Stable result codes; zero is success.
 */
typedef enum QcurvStatus {
  QCURV_STATUS_OK = 0,
  /**
   * A parameter lies outside the admissible range of the operator family.
   */
  QCURV_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The grid/basis combination is not implemented.
   */
  QCURV_STATUS_UNSUPPORTED = 2,
  /**
   * Buffer lengths or discretizations do not agree.
   */
  QCURV_STATUS_MISMATCH = 3,
  /**
   * An iterative routine failed to reach its tolerance.
   */
  QCURV_STATUS_NO_CONVERGENCE = 4,
  /**
   * A quantity required to be bounded away from zero degenerated.
   */
  QCURV_STATUS_DEGENERATE = 5,
  /**
   * Configuration text could not be validated.
   */
  QCURV_STATUS_CONFIG = 6,
  QCURV_STATUS_IO = 7,
  QCURV_STATUS_SERIALIZATION = 8,
  /**
   * A required pointer argument was null.
   */
  QCURV_STATUS_NULL_POINTER = 9,
  /**
   * An internal panic was caught at the boundary.
   */
  QCURV_STATUS_PANIC = 10,
} QcurvStatus;

/**
 * Opaque spectral transform handle (dimension, truncation, grid).
 */
typedef struct QcurvTransform QcurvTransform;

/**
 * Outcome summary of a curvature flow run.
 */
typedef struct QcurvFlowOutcome {
  /**
   * 0 = converged, 1 = concentrated along a bubble, 2 = step cap hit.
   */
  int flow_status;
  /**
   * Descent steps taken.
   */
  size_t steps;
  /**
   * Last value of the normalized curvature functional.
   */
  double final_level;
  /**
   * Last constrained-gradient norm.
   */
  double final_gradient_norm;
} QcurvFlowOutcome;

/**
 * Pointwise curvature callback: receives the ambient coordinates of a
 * point on the sphere (`len == n + 1`) plus the caller's context pointer,
 * and returns `K` at that point.  Derivatives are taken by geodesic
 * central differences, so the callback must be smooth.
 */
typedef double (*QcurvCurvatureFn)(const double *coords, size_t len, void *ctx);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qcurv_version(void);

/**
 * Static name for a status code (never null).
 */
const char *qcurv_status_name(enum QcurvStatus status);

/**
 * Copy the calling thread's last error message (including the trailing
 * NUL) into `buf`, truncating to `cap` bytes while keeping the result
 * NUL-terminated.  Returns the full size in bytes including the NUL, so
 * a return value larger than `cap` signals truncation.  `buf` may be
 * null to query the size.
 */
size_t qcurv_last_error_message(char *buf, size_t cap);

/**
 * Eigenvalue of the conformally covariant operator on degree-`degree`
 * spherical harmonics.
 */
enum QcurvStatus qcurv_eigenvalue(size_t n, double sigma, size_t degree, double *out);

/**
 * Sharp constant of the associated Sobolev inequality (the infimum of
 * the normalized functional at `K == 1`).
 */
enum QcurvStatus qcurv_sharp_constant(size_t n, double sigma, double *out);

/**
 * Critical Sobolev exponent `2n / (n - 2 sigma)`.
 */
enum QcurvStatus qcurv_critical_exponent(size_t n, double sigma, double *out);

/**
 * Create a spectral transform on the n-sphere with truncation `lmax`.
 * `zonal != 0` selects the axially symmetric grid (any `n >= 2`);
 * `zonal == 0` selects the full grid (`n` = 2 or 3 only).
 */
enum QcurvStatus qcurv_transform_new(size_t n, size_t lmax, int zonal, struct QcurvTransform **out);

/**
 * Release a transform handle.  Null is a no-op.
 */
void qcurv_transform_free(struct QcurvTransform *t);

/**
 * Number of grid points (the sample-buffer length for this handle).
 */
enum QcurvStatus qcurv_transform_grid_len(const struct QcurvTransform *t, size_t *out);

/**
 * Sphere dimension `n` of the handle.
 */
enum QcurvStatus qcurv_transform_dimension(const struct QcurvTransform *t, size_t *out);

/**
 * Write the ambient coordinates of every grid point, row-major, into
 * `buf`; `len` must equal `grid_len * (n + 1)`.
 */
enum QcurvStatus qcurv_transform_grid_coords(const struct QcurvTransform *t,
                                             double *buf,
                                             size_t len);

/**
 * Sample the standard bubble with the given center (ambient vector,
 * renormalized; `center_len` must equal `n + 1`) and concentration
 * `lambda` on the handle's grid.  `len` must equal the grid length.
 */
enum QcurvStatus qcurv_bubble_samples(const struct QcurvTransform *t,
                                      double sigma,
                                      const double *center,
                                      size_t center_len,
                                      double lambda,
                                      double *buf,
                                      size_t len);

/**
 * Normalized curvature functional of the field with samples `u` under
 * the curvature with samples `k`; both buffers must have grid length.
 */
enum QcurvStatus qcurv_functional_level(const struct QcurvTransform *t,
                                        double sigma,
                                        const double *u,
                                        const double *k,
                                        size_t len,
                                        double *out);

/**
 * Run the curvature flow at the critical exponent from the constant
 * start under the curvature with samples `k` (grid length), for at most
 * `max_steps` steps, and report the outcome.
 */
enum QcurvStatus qcurv_flow(const struct QcurvTransform *t,
                            double sigma,
                            const double *k,
                            size_t len,
                            size_t max_steps,
                            struct QcurvFlowOutcome *out);

/**
 * Locate and classify the critical points of the callback curvature on
 * S^n, run the counting analysis, and return the full report as a
 * heap-allocated JSON string (release with [`qcurv_string_free`]).
 *
 * `starts == 0` selects the default number of random starts.  With
 * `flag_degenerate == 0` a degenerate critical point aborts the analysis
 * (conservative default); otherwise it is carried along flagged.  The
 * curvature bounds entering the pinching clauses are taken over the
 * located critical set, which contains the global extrema whenever the
 * callback is smooth and the start coverage found them.  The gradient
 * tolerance is relaxed to the geodesic-difference noise floor, since
 * callback derivatives are measured, not analytic.
 */
enum QcurvStatus qcurv_existence_json(size_t n,
                                      double sigma,
                                      QcurvCurvatureFn k,
                                      void *ctx,
                                      size_t starts,
                                      uint64_t seed,
                                      int flag_degenerate,
                                      char **out);

/**
 * Release a string returned by this library.  Null is a no-op.
 */
void qcurv_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QCURV_H */
