#ifndef BCWAVE_H
#define BCWAVE_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BcwStatus {
  BCW_STATUS_OK = 0,
  BCW_STATUS_NO_DECAYING_SOLUTION = 1,
  BCW_STATUS_DEGENERATE_ETA = 2,
  BCW_STATUS_GRID_MISMATCH = 3,
  BCW_STATUS_NON_CONVERGENCE = 4,
  BCW_STATUS_NO_EIGENVALUES = 5,
  BCW_STATUS_GAUGE_ZERO = 6,
  BCW_STATUS_ILL_CONDITIONED = 7,
  BCW_STATUS_RANK_COLLAPSE = 8,
  BCW_STATUS_UNCERTIFIED = 9,
  BCW_STATUS_INVALID_ARGUMENT = 10,
  BCW_STATUS_PARSE = 11,
  BCW_STATUS_IO = 12,
  BCW_STATUS_NULL_POINTER = 13,
  BCW_STATUS_BUFFER_TOO_SMALL = 14,
  BCW_STATUS_PANIC = 15,
} BcwStatus;

/**
 * A discrete spectral measure `(λ_n, ρ_n)`.
 */
typedef struct BcwMeasure BcwMeasure;

/**
 * A sampled potential `q` on `x_i = i h`.
 */
typedef struct BcwPotential BcwPotential;

/**
 * Output of the inverse pipeline.
 */
typedef struct BcwReconstruction BcwReconstruction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t bcw_last_error(char *buf, size_t len);

/**
 * Loads `const:c`, `bump:c,amp,center,width` or a CSV path and certifies
 * positivity.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum BcwStatus bcw_potential_load(const char *spec,
                                  double h,
                                  double x_max,
                                  struct BcwPotential **out);

/**
 * Builds a certified potential from samples on `x_i = i h`.
 *
 * # Safety
 * `q` must point to `n` doubles; `out` must be writable.
 */
enum BcwStatus bcw_potential_from_samples(const double *q,
                                          size_t n,
                                          double h,
                                          struct BcwPotential **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void bcw_potential_free(struct BcwPotential *p);

/**
 * `φ'(0)` and `η'(0)` of the gauge pair.
 *
 * # Safety
 * `p` must be a live handle; the outputs must be writable.
 */
enum BcwStatus bcw_gauge(const struct BcwPotential *p, double *phi_prime0, double *eta_prime0);

/**
 * `u^f(·, T)` on `x_i = i h`, `i = 0..=T/h`, by finite differences. The
 * control is sampled on the potential's grid.
 *
 * # Safety
 * `f` must point to `nf` doubles and `u` to `cap` writable doubles.
 */
enum BcwStatus bcw_forward_final(const struct BcwPotential *p,
                                 const double *f,
                                 size_t nf,
                                 double t,
                                 double *u,
                                 size_t cap,
                                 size_t *written);

/**
 * Dirichlet spectral measure of `q` on `[0, x]` truncated at `lambda_max`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum BcwStatus bcw_measure_truncated(const struct BcwPotential *p,
                                     double x,
                                     double lambda_max,
                                     struct BcwMeasure **out);

/**
 * # Safety
 * `nodes` and `weights` must point to `n` doubles; `out` must be writable.
 */
enum BcwStatus bcw_measure_from_arrays(const double *nodes,
                                       const double *weights,
                                       size_t n,
                                       struct BcwMeasure **out);

/**
 * Reads a `lambda,rho` CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BcwStatus bcw_measure_read_csv(const char *path, struct BcwMeasure **out);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t bcw_measure_len(const struct BcwMeasure *m);

/**
 * # Safety
 * `nodes` and `weights` must point to `cap` writable doubles.
 */
enum BcwStatus bcw_measure_copy(const struct BcwMeasure *m,
                                double *nodes,
                                double *weights,
                                size_t cap);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void bcw_measure_free(struct BcwMeasure *m);

/**
 * Reconstructs `q` from the measure alone. `config` is `key = value` text;
 * null selects the defaults.
 *
 * # Safety
 * `m` must be a live handle, `config` null or NUL-terminated, `out` writable.
 */
enum BcwStatus bcw_invert(const struct BcwMeasure *m,
                          const char *config,
                          struct BcwReconstruction **out);

/**
 * Length of the coordinate grid, or 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t bcw_reconstruction_len(const struct BcwReconstruction *r);

/**
 * Copies `tau`, `p`, `Q`, `e` and `q_rec`; any output may be null to skip it.
 *
 * # Safety
 * Non-null outputs must point to `cap` writable doubles.
 */
enum BcwStatus bcw_reconstruction_copy(const struct BcwReconstruction *r,
                                       double *tau,
                                       double *p,
                                       double *q_coef,
                                       double *e,
                                       double *q_rec,
                                       size_t cap);

/**
 * Endpoints of the trusted `τ`-interval.
 *
 * # Safety
 * `r` must be a live handle; the outputs must be writable.
 */
enum BcwStatus bcw_reconstruction_trusted(const struct BcwReconstruction *r, double *a, double *b);

/**
 * # Safety
 * `r` must be null or a handle from this library, not yet freed.
 */
void bcw_reconstruction_free(struct BcwReconstruction *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCWAVE_H */
