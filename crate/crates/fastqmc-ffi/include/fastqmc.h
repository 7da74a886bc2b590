/* C interface to the fastqmc fast QMC matrix-vector library. */

#ifndef FASTQMC_H
#define FASTQMC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FastqmcStatus {
  FASTQMC_STATUS_OK = 0,
  FASTQMC_STATUS_NULL_POINTER = 1,
  FASTQMC_STATUS_NOT_PRIME = 2,
  FASTQMC_STATUS_INVALID_ARGUMENT = 3,
  FASTQMC_STATUS_DIMENSION_MISMATCH = 4,
  FASTQMC_STATUS_INDEX_OUT_OF_RANGE = 5,
  FASTQMC_STATUS_ENDPOINT_POLICY = 6,
  FASTQMC_STATUS_NUMERICAL_FAILURE = 7,
} FastqmcStatus;

/**
 * The univariate transform applied to every coordinate.
 */
typedef enum FastqmcTransform {
  FASTQMC_TRANSFORM_IDENTITY = 0,
  FASTQMC_TRANSFORM_SHIFT_HALF = 1,
  FASTQMC_TRANSFORM_TENT = 2,
  FASTQMC_TRANSFORM_INV_NORMAL_CDF = 3,
} FastqmcTransform;

/**
 * Handling of the point at the origin (row 0 of the point matrix).
 */
typedef enum FastqmcRowZero {
  /**
   * Keep row 0; rejected for transforms unbounded at zero.
   */
  FASTQMC_ROW_ZERO_INCLUDE = 0,
  /**
   * Omit row 0; outputs have N - 1 rows.
   */
  FASTQMC_ROW_ZERO_DROP = 1,
  /**
   * Keep row 0, replacing the transform value at zero by `substitute`.
   */
  FASTQMC_ROW_ZERO_SUBSTITUTE = 2,
} FastqmcRowZero;

/**
 * A reordered rank-1 lattice (opaque).
 */
typedef struct FastqmcLattice FastqmcLattice;

/**
 * A point matrix in factored form with a cached spectrum (opaque).
 */
typedef struct FastqmcMatrix FastqmcMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *fastqmc_status_message(enum FastqmcStatus status);

/**
 * Builds a reordered lattice from an explicit generating vector of
 * `len` components for a prime `n`.
 *
 * # Safety
 * `components` must point to `len` readable u64 values and `out` must
 * be a valid location for a handle pointer.
 */
enum FastqmcStatus fastqmc_lattice_from_gvec(uint64_t n,
                                             const uint64_t *components,
                                             uintptr_t len,
                                             struct FastqmcLattice **out);

/**
 * Builds a reordered lattice from a component-by-component constructed
 * generating vector with the default weights `1/j^2`; for `s >= n` the
 * leading components repeat cyclically.
 *
 * # Safety
 * `out` must be a valid location for a handle pointer.
 */
enum FastqmcStatus fastqmc_lattice_cbc(uint64_t n, uintptr_t s, struct FastqmcLattice **out);

/**
 * Releases a lattice handle. Passing NULL is a no-op.
 *
 * # Safety
 * `lattice` must come from a fastqmc constructor and not be freed twice.
 */
void fastqmc_lattice_free(struct FastqmcLattice *lattice);

/**
 * Number of points N (including the point at the origin).
 *
 * # Safety
 * `lattice` must be a live handle.
 */
uint64_t fastqmc_lattice_point_count(const struct FastqmcLattice *lattice);

/**
 * Dimension s of the lattice.
 *
 * # Safety
 * `lattice` must be a live handle.
 */
uintptr_t fastqmc_lattice_dimension(const struct FastqmcLattice *lattice);

/**
 * Writes point `index` (untransformed, in [0,1)^s) into `out[0..s]`.
 *
 * # Safety
 * `out` must point to at least `out_len` writable doubles.
 */
enum FastqmcStatus fastqmc_lattice_point(const struct FastqmcLattice *lattice,
                                         uint64_t index,
                                         double *out,
                                         uintptr_t out_len);

/**
 * Builds the factored point matrix for a lattice and transform. The
 * `substitute` value is only read for the Substitute row policy.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be a valid location.
 */
enum FastqmcStatus fastqmc_matrix_new(const struct FastqmcLattice *lattice,
                                      enum FastqmcTransform transform,
                                      enum FastqmcRowZero row_zero,
                                      double substitute,
                                      struct FastqmcMatrix **out);

/**
 * Releases a matrix handle. Passing NULL is a no-op.
 *
 * # Safety
 * `matrix` must come from `fastqmc_matrix_new` and not be freed twice.
 */
void fastqmc_matrix_free(struct FastqmcMatrix *matrix);

/**
 * Rows a product writes: N, or N - 1 under the Drop policy.
 *
 * # Safety
 * `matrix` must be a live handle.
 */
uintptr_t fastqmc_matrix_output_rows(const struct FastqmcMatrix *matrix);

/**
 * `Y a` through the circulant factorization, O(N log N). Writes
 * `fastqmc_matrix_output_rows` doubles into `out`.
 *
 * # Safety
 * `a` must hold `a_len` doubles and `out` at least `out_len` doubles.
 */
enum FastqmcStatus fastqmc_matrix_matvec(const struct FastqmcMatrix *matrix,
                                         const double *a,
                                         uintptr_t a_len,
                                         double *out,
                                         uintptr_t out_len);

/**
 * Reference row-by-row `Y a`, O(N s); same contract as the fast call.
 *
 * # Safety
 * As for `fastqmc_matrix_matvec`.
 */
enum FastqmcStatus fastqmc_matrix_matvec_naive(const struct FastqmcMatrix *matrix,
                                               const double *a,
                                               uintptr_t a_len,
                                               double *out,
                                               uintptr_t out_len);

/**
 * `Y A` for a row-major s x t matrix `a`; writes a row-major
 * (output rows) x t matrix into `out`. One cached spectrum is reused
 * across the t columns.
 *
 * # Safety
 * `a` must hold `s * t` doubles and `out` at least
 * `fastqmc_matrix_output_rows(matrix) * t` doubles.
 */
enum FastqmcStatus fastqmc_matrix_matmat(const struct FastqmcMatrix *matrix,
                                         const double *a,
                                         uintptr_t s,
                                         uintptr_t t,
                                         double *out,
                                         uintptr_t out_len);

/**
 * Inverse standard normal CDF; rejects arguments outside (0, 1).
 *
 * # Safety
 * `out` must be a valid location for one double.
 */
enum FastqmcStatus fastqmc_inv_normal_cdf(double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FASTQMC_H */
