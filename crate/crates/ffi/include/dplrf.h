#ifndef DPLRF_H
#define DPLRF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DplrfStatus {
  DPLRF_STATUS_OK = 0,
  DPLRF_STATUS_INVALID_INPUT = 1,
  DPLRF_STATUS_INVALID_ARGUMENT = 2,
  DPLRF_STATUS_INDEX_OUT_OF_RANGE = 3,
  DPLRF_STATUS_EMPTY_BASIS = 4,
  DPLRF_STATUS_CONFIG_MISMATCH = 5,
  DPLRF_STATUS_HORIZON_EXCEEDED = 6,
  DPLRF_STATUS_OVERFLOW = 7,
  DPLRF_STATUS_PARSE = 8,
  DPLRF_STATUS_IO = 9,
  DPLRF_STATUS_NULL_POINTER = 10,
  DPLRF_STATUS_BUFFER_TOO_SMALL = 11,
  DPLRF_STATUS_PANIC = 12,
} DplrfStatus;

typedef enum DplrfAlgorithm {
  DPLRF_ALGORITHM_SPECTRAL = 0,
  DPLRF_ALGORITHM_LOW_SPACE = 1,
} DplrfAlgorithm;

typedef struct DplrfContinual DplrfContinual;

typedef struct DplrfFactorization DplrfFactorization;

typedef struct DplrfLowSpace DplrfLowSpace;

typedef struct DplrfSpectral DplrfSpectral;

/**
 * Construction parameters. `epsilon = INFINITY` runs without noise.
 * `t` and `v` of 0 mean "use the planned size".
 */
typedef struct DplrfConfig {
  size_t m;
  size_t n;
  size_t k;
  double alpha;
  double epsilon;
  double delta;
  uint64_t seed;
  size_t t;
  size_t v;
  double c_t;
  double c_v;
} DplrfConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or NULL. Valid until the
 * next `dplrf_*` call on the same thread.
 */
const char *dplrf_last_error(void);

/**
 * Defaults: α = 0.5, non-private, δ = 0.01, seed 0, planned sizes.
 */
struct DplrfConfig dplrf_config_default(size_t m, size_t n, size_t k);

/**
 * # Safety
 * `config` must be valid for reads; `out` must be valid for writes.
 */
enum DplrfStatus dplrf_spectral_new(const struct DplrfConfig *config, struct DplrfSpectral **out);

/**
 * # Safety
 * `state` must be a live handle.
 */
enum DplrfStatus dplrf_spectral_update(struct DplrfSpectral *state, size_t i, size_t j, double s);

/**
 * Applies `len` updates. Stops at the first invalid one, leaving the
 * earlier ones applied.
 *
 * # Safety
 * The three arrays must hold `len` elements each.
 */
enum DplrfStatus dplrf_spectral_update_batch(struct DplrfSpectral *state,
                                             const size_t *i,
                                             const size_t *j,
                                             const double *s,
                                             size_t len);

/**
 * Adds `other`'s sketches into `state`. Both must share a configuration.
 *
 * # Safety
 * Both must be live handles.
 */
enum DplrfStatus dplrf_spectral_merge(struct DplrfSpectral *state,
                                      const struct DplrfSpectral *other);

/**
 * # Safety
 * `state` must be a live handle and `out` valid for writes.
 */
enum DplrfStatus dplrf_spectral_finalize(const struct DplrfSpectral *state,
                                         struct DplrfFactorization **out);

/**
 * # Safety
 * `state` must be a handle from `dplrf_spectral_new` or NULL.
 */
void dplrf_spectral_free(struct DplrfSpectral *state);

/**
 * # Safety
 * `config` must be valid for reads; `out` must be valid for writes.
 */
enum DplrfStatus dplrf_lowspace_new(const struct DplrfConfig *config, struct DplrfLowSpace **out);

/**
 * # Safety
 * `state` must be a live handle.
 */
enum DplrfStatus dplrf_lowspace_update(struct DplrfLowSpace *state, size_t i, size_t j, double s);

/**
 * # Safety
 * The three arrays must hold `len` elements each.
 */
enum DplrfStatus dplrf_lowspace_update_batch(struct DplrfLowSpace *state,
                                             const size_t *i,
                                             const size_t *j,
                                             const double *s,
                                             size_t len);

/**
 * # Safety
 * Both must be live handles.
 */
enum DplrfStatus dplrf_lowspace_merge(struct DplrfLowSpace *state,
                                      const struct DplrfLowSpace *other);

/**
 * Factorization of the padded matrix. With `restricted` nonzero the padding
 * coordinates are dropped and the result is refactored to the A block.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for writes.
 */
enum DplrfStatus dplrf_lowspace_finalize(const struct DplrfLowSpace *state,
                                         bool restricted,
                                         struct DplrfFactorization **out);

/**
 * # Safety
 * `state` must be a handle from `dplrf_lowspace_new` or NULL.
 */
void dplrf_lowspace_free(struct DplrfLowSpace *state);

/**
 * Binary-tree continual release over `horizon` epochs (padded up to a power
 * of two). `config.epsilon` and `config.delta` are the whole-stream budget.
 *
 * # Safety
 * `config` must be valid for reads; `out` must be valid for writes.
 */
enum DplrfStatus dplrf_continual_new(const struct DplrfConfig *config,
                                     enum DplrfAlgorithm algorithm,
                                     uint64_t horizon,
                                     struct DplrfContinual **out);

/**
 * Closes one epoch holding the given updates. `level` (may be NULL)
 * receives the tree level that was filled.
 *
 * # Safety
 * The three arrays must hold `len` elements each.
 */
enum DplrfStatus dplrf_continual_step(struct DplrfContinual *state,
                                      const size_t *i,
                                      const size_t *j,
                                      const double *s,
                                      size_t len,
                                      uint32_t *level);

/**
 * Number of epochs closed so far.
 *
 * # Safety
 * `state` must be a live handle and `epoch` valid for writes.
 */
enum DplrfStatus dplrf_continual_epoch(const struct DplrfContinual *state, uint64_t *epoch);

/**
 * Factorization of the prefix up to the current epoch. Low-space trees
 * return the padded factorization.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for writes.
 */
enum DplrfStatus dplrf_continual_query(const struct DplrfContinual *state,
                                       struct DplrfFactorization **out);

/**
 * # Safety
 * `state` must be a handle from `dplrf_continual_new` or NULL.
 */
void dplrf_continual_free(struct DplrfContinual *state);

/**
 * `U` is rows×k, `V` is cols×k.
 *
 * # Safety
 * `f` must be a live handle; each out pointer may be NULL.
 */
enum DplrfStatus dplrf_factorization_shape(const struct DplrfFactorization *f,
                                           size_t *rows,
                                           size_t *cols,
                                           size_t *k,
                                           size_t *achieved_rank);

/**
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum DplrfStatus dplrf_factorization_u(const struct DplrfFactorization *f, double *buf, size_t len);

/**
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum DplrfStatus dplrf_factorization_sigma(const struct DplrfFactorization *f,
                                           double *buf,
                                           size_t len);

/**
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum DplrfStatus dplrf_factorization_v(const struct DplrfFactorization *f, double *buf, size_t len);

/**
 * # Safety
 * `f` must be a factorization handle or NULL.
 */
void dplrf_factorization_free(struct DplrfFactorization *f);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPLRF_H */
