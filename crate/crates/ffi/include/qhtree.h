#ifndef QHTREE_H
#define QHTREE_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QhtStatus {
  QHT_STATUS_OK = 0,
  QHT_STATUS_NULL_POINTER = 1,
  QHT_STATUS_INVALID_UTF8 = 2,
  QHT_STATUS_CONFIG = 3,
  QHT_STATUS_SCHEMA = 4,
  QHT_STATUS_CONTRACT = 5,
  QHT_STATUS_MODEL = 6,
  QHT_STATUS_IO = 7,
  QHT_STATUS_PARSE = 8,
  QHT_STATUS_BUFFER_TOO_SMALL = 9,
  QHT_STATUS_PANIC = 10,
} QhtStatus;

typedef enum QhtObserver {
  QHT_OBSERVER_QUANTILE = 0,
  QHT_OBSERVER_GAUSSIAN = 1,
} QhtObserver;

/**
 * Opaque tree handle.
 */
typedef struct QhtTree QhtTree;

/**
 * Learner settings; fill with [`qht_params_default`] then override.
 */
typedef struct QhtParams {
  /**
   * A [`QhtObserver`] value.
   */
  uint32_t observer;
  bool fixed_point;
  uint64_t n_min;
  size_t split_points;
  double tau;
  double delta;
  double lambda;
  size_t quantiles;
  size_t max_depth;
  size_t max_leaves;
  size_t elements;
} QhtParams;

typedef struct QhtStats {
  uint64_t samples;
  uint64_t trials;
  uint64_t splits;
  uint64_t splits_by_bound;
  uint64_t splits_by_tie;
  uint64_t pool_exhausted;
  size_t leaves;
  size_t depth;
} QhtStats;

/**
 * Accelerator design point for the cost models.
 */
typedef struct QhtDesign {
  uint64_t labels;
  uint64_t numeric;
  uint64_t quantiles;
  uint64_t elements;
  uint64_t depth;
  double freq_mhz;
  uint64_t samples;
  double cold_start_cycles;
} QhtDesign;

typedef struct QhtCost {
  uint64_t latency_cycles;
  double tp_fpga_bps;
  double tp_overall_bps;
  double exec_time_s;
  uint64_t dsp;
  /**
   * 18 Kb blocks.
   */
  uint64_t bram;
  double bram36;
} QhtCost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qht_version(void);

/**
 * Copy the calling thread's last error message into `buf`.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes; `needed` must be
 * null or writable.
 */
enum QhtStatus qht_last_error(char *buf, size_t cap, size_t *needed);

/**
 * # Safety
 * `out` must be null or writable.
 */
enum QhtStatus qht_params_default(struct QhtParams *out);

/**
 * Build a tree from a JSON schema. `params` may be null for defaults.
 *
 * # Safety
 * `schema_json` must be a NUL-terminated string; `params` null or valid;
 * `out` writable.
 */
enum QhtStatus qht_tree_new(const char *schema_json,
                            const struct QhtParams *params,
                            struct QhtTree **out);

/**
 * # Safety
 * `tree` must be null or a handle from [`qht_tree_new`] not yet freed.
 */
void qht_tree_free(struct QhtTree *tree);

/**
 * Learn one labelled sample. `split` (optional) is set when a leaf split.
 *
 * # Safety
 * `tree` must be a live handle; arrays must hold the given counts; `split`
 * null or writable.
 */
enum QhtStatus qht_tree_learn(struct QhtTree *tree,
                              const double *numeric,
                              size_t n_numeric,
                              const uint32_t *categorical,
                              size_t n_categorical,
                              uint32_t label,
                              bool *split);

/**
 * # Safety
 * `tree` must be a live handle; arrays must hold the given counts; `out`
 * writable.
 */
enum QhtStatus qht_tree_predict(const struct QhtTree *tree,
                                const double *numeric,
                                size_t n_numeric,
                                const uint32_t *categorical,
                                size_t n_categorical,
                                uint32_t *out);

/**
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum QhtStatus qht_tree_stats(const struct QhtTree *tree, struct QhtStats *out);

/**
 * Text dump of the tree. Call with a null `buf` to learn the size.
 *
 * # Safety
 * `tree` must be a live handle; `buf` null or `cap` writable bytes;
 * `needed` null or writable.
 */
enum QhtStatus qht_tree_dump(const struct QhtTree *tree, char *buf, size_t cap, size_t *needed);

/**
 * Evaluate the cost models. `values` holds `V_i` for each categorical
 * attribute (may be null when `n_values` is 0).
 *
 * # Safety
 * `design` and `out` must be valid; `values` must hold `n_values` entries.
 */
enum QhtStatus qht_cost_report(const struct QhtDesign *design,
                               const uint64_t *values,
                               size_t n_values,
                               struct QhtCost *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QHTREE_H */
