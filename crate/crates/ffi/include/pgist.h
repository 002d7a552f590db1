#ifndef PGIST_H
#define PGIST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PgistSolver {
  /**
   * Threshold-then-restore iteration.
   */
  PGIST_SOLVER_PG = 0,
  /**
   * Thresholded Landweber baseline.
   */
  PGIST_SOLVER_ISTA = 1,
} PgistSolver;

typedef enum PgistRule {
  PGIST_RULE_SOFT = 0,
  PGIST_RULE_HARD = 1,
} PgistRule;

/**
 * Result code of every fallible call.
 */
typedef enum PgistStatus {
  PGIST_STATUS_OK = 0,
  PGIST_STATUS_INVALID_SIZE = 1,
  PGIST_STATUS_INVALID_COUNT = 2,
  PGIST_STATUS_INVALID_PARAMETER = 3,
  PGIST_STATUS_SHAPE = 4,
  PGIST_STATUS_DIVERGENCE = 5,
  PGIST_STATUS_IO = 6,
  PGIST_STATUS_PARSE = 7,
  PGIST_STATUS_NULL_POINTER = 8,
  PGIST_STATUS_PANIC = 9,
} PgistStatus;

/**
 * Opaque random-sample selection operator.
 */
typedef struct PgistPattern1D PgistPattern1D;

/**
 * Opaque masked-Fourier operator on a radial mask.
 */
typedef struct PgistRadialMask PgistRadialMask;

typedef struct PgistSolverConfig {
  enum PgistSolver solver;
  double delta;
  size_t max_iter;
  enum PgistRule rule;
  /**
   * Birgé-Massart exponent, used when `fixed_gamma < 0`.
   */
  double alpha;
  /**
   * Birgé-Massart budget; 0 means the signal length.
   */
  size_t bm_budget;
  /**
   * Fixed threshold on every detail subband; negative selects
   * Birgé-Massart (for ISTA: its mean level on the zero-filled estimate).
   */
  double fixed_gamma;
  bool freeze_plan;
} PgistSolverConfig;

typedef struct PgistRecoveryInfo {
  size_t iterations;
  /**
   * False when the iteration cap was reached first.
   */
  bool converged;
} PgistRecoveryInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *pgist_last_error_message(void);

struct PgistSolverConfig pgist_solver_config_default(void);

double pgist_soft(double x, double gamma);

double pgist_hard(double x, double gamma);

/**
 * Write the HeaviSine test signal into `out[0..n]`.
 *
 * # Safety
 * `out` must be valid for `n` writes.
 */
enum PgistStatus pgist_heavisine(size_t n, double *out);

/**
 * Write the `n x n` Shepp-Logan phantom, row-major, into `out[0..n*n]`.
 *
 * # Safety
 * `out` must be valid for `n * n` writes.
 */
enum PgistStatus pgist_shepp_logan(size_t n, double *out);

/**
 * Add seeded Gaussian noise of the given PSNR (dB, peak 1) in place.
 *
 * # Safety
 * `values` must be valid for `len` reads and writes.
 */
enum PgistStatus pgist_add_awgn(double *values, size_t len, double noise_db, uint64_t seed);

/**
 * Random set of `m` distinct sample positions out of `n`.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum PgistStatus pgist_pattern1d_random(size_t n,
                                        size_t m,
                                        uint64_t seed,
                                        struct PgistPattern1D **out);

/**
 * Pattern from explicit strictly increasing indices below `n`.
 *
 * # Safety
 * `indices` must be valid for `len` reads, `out` for one pointer write.
 */
enum PgistStatus pgist_pattern1d_from_indices(size_t n,
                                              const size_t *indices,
                                              size_t len,
                                              struct PgistPattern1D **out);

/**
 * # Safety
 * `p` must come from a `pgist_pattern1d_*` constructor, or be null.
 */
void pgist_pattern1d_free(struct PgistPattern1D *p);

/**
 * Number of selected samples; 0 for a null handle.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t pgist_pattern1d_len(const struct PgistPattern1D *p);

/**
 * Signal length the pattern applies to; 0 for a null handle.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t pgist_pattern1d_n(const struct PgistPattern1D *p);

/**
 * Copy the sorted indices into `out[0..len]`, where `len` is
 * [`pgist_pattern1d_len`].
 *
 * # Safety
 * `p` must be a live handle; `out` valid for `cap` writes.
 */
enum PgistStatus pgist_pattern1d_indices(const struct PgistPattern1D *p, size_t *out, size_t cap);

/**
 * Radial-line mask on an `n x n` frequency grid.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum PgistStatus pgist_radial_mask_create(size_t n, size_t lines, struct PgistRadialMask **out);

/**
 * # Safety
 * `m` must come from [`pgist_radial_mask_create`], or be null.
 */
void pgist_radial_mask_free(struct PgistRadialMask *m);

/**
 * Number of sampled frequencies; 0 for a null handle.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
size_t pgist_radial_mask_count(const struct PgistRadialMask *m);

/**
 * Grid side; 0 for a null handle.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
size_t pgist_radial_mask_n(const struct PgistRadialMask *m);

/**
 * Write the `n x n` cell grid (1 = sampled) in DFT index order.
 *
 * # Safety
 * `m` must be a live handle; `out` valid for `cap` writes.
 */
enum PgistStatus pgist_radial_mask_cells(const struct PgistRadialMask *m, uint8_t *out, size_t cap);

/**
 * Measure `signal[0..n]` into `out[0..len]`.
 *
 * # Safety
 * `p` must be a live handle; buffers sized per the pattern.
 */
enum PgistStatus pgist_sample_1d(const struct PgistPattern1D *p, const double *signal, double *out);

/**
 * Measure a row-major `n x n` image into `out` as interleaved
 * `(re, im)` pairs, `2 * count` values.
 *
 * # Safety
 * `m` must be a live handle; buffers sized per the mask.
 */
enum PgistStatus pgist_sample_2d(const struct PgistRadialMask *m, const double *image, double *out);

/**
 * Recover a length-`n` signal from `g[0..len]`. `cfg` and `info` may be
 * null (defaults / not reported).
 *
 * # Safety
 * `p` must be a live handle; buffers sized per the pattern.
 */
enum PgistStatus pgist_recover_1d(const struct PgistPattern1D *p,
                                  const double *g,
                                  const struct PgistSolverConfig *cfg,
                                  double *out,
                                  struct PgistRecoveryInfo *info);

/**
 * Recover a row-major `n x n` image from interleaved `(re, im)` pairs.
 * `cfg` and `info` may be null.
 *
 * # Safety
 * `m` must be a live handle; buffers sized per the mask.
 */
enum PgistStatus pgist_recover_2d(const struct PgistRadialMask *m,
                                  const double *g,
                                  const struct PgistSolverConfig *cfg,
                                  double *out,
                                  struct PgistRecoveryInfo *info);

/**
 * Mean squared error of two length-`len` arrays; NaN on null input or
 * `len == 0`.
 *
 * # Safety
 * `a` and `b` must be valid for `len` reads.
 */
double pgist_mse(const double *a, const double *b, size_t len);

/**
 * `10 log10(peak^2 / mse)`; infinite for identical inputs, NaN on null
 * input, `len == 0` or `peak <= 0`.
 *
 * # Safety
 * `a` and `b` must be valid for `len` reads.
 */
double pgist_psnr(const double *a, const double *b, size_t len, double peak);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pgist_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PGIST_H */
