/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef APLORDER_H
#define APLORDER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AploStatus {
  APLO_STATUS_OK = 0,
  APLO_STATUS_NULL_POINTER = 1,
  APLO_STATUS_INVALID_INPUT = 2,
  APLO_STATUS_DIMENSION_MISMATCH = 3,
  APLO_STATUS_DEGENERATE = 4,
  APLO_STATUS_NOT_CANONICAL = 5,
  APLO_STATUS_NUMERICAL = 6,
  APLO_STATUS_UNSUPPORTED = 7,
  APLO_STATUS_IO = 8,
  APLO_STATUS_PANIC = 9,
} AploStatus;

typedef enum AploRelation {
  APLO_RELATION_LEFT_PRECEDES = 0,
  APLO_RELATION_RIGHT_PRECEDES = 1,
  APLO_RELATION_EQUIVALENT = 2,
  APLO_RELATION_INCOMPARABLE = 3,
} AploRelation;

/**
 * Opaque spectral measure handle.
 */
typedef struct AploMeasure AploMeasure;

/**
 * Outcome of comparing two curves on a list of portfolios.
 */
typedef struct AploVerdict {
  enum AploRelation relation;
  /**
   * `max |left − right|` over the portfolios.
   */
  double max_violation;
  /**
   * `max(left − right, 0)`.
   */
  double forward_violation;
  /**
   * `max(right − left, 0)`.
   */
  double backward_violation;
  double tolerance;
  /**
   * Row of the portfolio attaining `max_violation`, or -1 when equivalent.
   */
  ptrdiff_t witness_index;
} AploVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *aplo_version(void);

/**
 * Message for the most recent failed call on this thread, or NULL if the
 * most recent call succeeded. Valid until the next call on this thread.
 */
const char *aplo_last_error(void);

/**
 * Independence measure: unit atoms at the `d` basis vectors.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum AploStatus aplo_measure_independent(size_t d, struct AploMeasure **out);

/**
 * Comonotone measure: a single atom of mass `d` on the diagonal.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum AploStatus aplo_measure_comonotone(size_t d, struct AploMeasure **out);

/**
 * Bivariate Gumbel measure, `theta >= 1`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum AploStatus aplo_measure_gumbel(double theta, struct AploMeasure **out);

/**
 * Bivariate Galambos measure, `theta > 0`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum AploStatus aplo_measure_galambos(double theta, struct AploMeasure **out);

/**
 * Finite measure from `n_atoms` directions (row-major `n_atoms × d`) and
 * positive weights. Directions are normalized to unit 1-norm.
 *
 * # Safety
 * `coords` must point to `n_atoms * d` doubles, `weights` to `n_atoms`
 * doubles, and `out` must be valid for writing one pointer.
 */
enum AploStatus aplo_measure_discrete(size_t d,
                                      size_t n_atoms,
                                      const double *coords,
                                      const double *weights,
                                      struct AploMeasure **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `m` must be NULL or a handle returned by this library and not yet freed.
 */
void aplo_measure_free(struct AploMeasure *m);

/**
 * # Safety
 * `m` must be a live handle and `out` valid for writing.
 */
enum AploStatus aplo_measure_dim(const struct AploMeasure *m, size_t *out);

/**
 * # Safety
 * `m` must be a live handle and `out` valid for writing.
 */
enum AploStatus aplo_measure_total_mass(const struct AploMeasure *m, double *out);

/**
 * Canonical form of `m` at tail index `alpha`, as a new handle.
 *
 * # Safety
 * `m` must be a live handle and `out` valid for writing one pointer.
 */
enum AploStatus aplo_canonicalize(const struct AploMeasure *m,
                                  double alpha,
                                  struct AploMeasure **out);

/**
 * Checks `∫|s_i| dΨ = 1` for every coordinate. `tol <= 0` selects the
 * representation's default tolerance.
 *
 * # Safety
 * `m` must be a live handle; `pass` and `max_deviation` valid for writing.
 */
enum AploStatus aplo_validate(const struct AploMeasure *m,
                              double tol,
                              bool *pass,
                              double *max_deviation);

/**
 * Extreme risk index `∫ (ξ·s)_+^α dΨ(s)` of one portfolio of length `d`.
 *
 * # Safety
 * `m` must be a live handle, `xi` must point to `d` doubles and `out` must be
 * valid for writing.
 */
enum AploStatus aplo_extreme_risk_index(const struct AploMeasure *m,
                                        const double *xi,
                                        size_t d,
                                        double alpha,
                                        double *out);

/**
 * Writes the `2 * n` coordinates of the evenly spaced bivariate grid
 * `(i/(n−1), 1 − i/(n−1))`.
 *
 * # Safety
 * `out_xi` must be valid for writing `2 * n` doubles.
 */
enum AploStatus aplo_bivariate_grid(size_t n, double *out_xi);

/**
 * Diversification curve of `m` at `n_points` portfolios.
 *
 * # Safety
 * `m` must be a live handle, `xi` must point to `n_points * dim(m)` doubles
 * and `out_values` must be valid for writing `n_points` doubles.
 */
enum AploStatus aplo_diversification_curve(const struct AploMeasure *m,
                                           double alpha,
                                           const double *xi,
                                           size_t n_points,
                                           double *out_values);

/**
 * Curve of the elliptical model with `d × d` row-major covariance `cov`.
 *
 * # Safety
 * `cov` must point to `d * d` doubles, `xi` to `n_points * d` doubles and
 * `out_values` must be valid for writing `n_points` doubles.
 */
enum AploStatus aplo_elliptical_curve(const double *cov,
                                      size_t d,
                                      double alpha,
                                      const double *xi,
                                      size_t n_points,
                                      double *out_values);

/**
 * Compares two canonical measures through their curves at `n_points`
 * portfolios. `tol <= 0` selects the default tolerance.
 *
 * # Safety
 * `left` and `right` must be live handles of equal dimension `d`, `xi` must
 * point to `n_points * d` doubles and `out` must be valid for writing.
 */
enum AploStatus aplo_galpha_check(const struct AploMeasure *left,
                                  const struct AploMeasure *right,
                                  double alpha,
                                  const double *xi,
                                  size_t n_points,
                                  double tol,
                                  struct AploVerdict *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APLORDER_H */
