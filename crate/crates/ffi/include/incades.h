#ifndef INCADES_H
#define INCADES_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  INCADES_STATUS_OK = 0,
  INCADES_STATUS_NULL_POINTER = 1,
  INCADES_STATUS_INVALID_ARGUMENT = 2,
  INCADES_STATUS_DIMENSION_MISMATCH = 3,
  INCADES_STATUS_PANIC = 4,
} IncadesStatus;

typedef enum {
  INCADES_DETECTOR_RDDM = 0,
  INCADES_DETECTOR_DDM = 1,
  INCADES_DETECTOR_DISABLED = 2,
} IncadesDetector;

typedef enum {
  INCADES_DISTANCE_CANBERRA = 0,
  INCADES_DISTANCE_EUCLIDEAN = 1,
} IncadesDistance;

typedef enum {
  INCADES_BACKEND_KD_TREE = 0,
  INCADES_BACKEND_BRUTE_FORCE = 1,
} IncadesBackend;

typedef enum {
  INCADES_LEARNER_HOEFFDING_TREE = 0,
  INCADES_LEARNER_NAIVE_BAYES = 1,
} IncadesLearner;

typedef enum {
  INCADES_LEVEL_STABLE = 0,
  INCADES_LEVEL_WARNING = 1,
  INCADES_LEVEL_DRIFT = 2,
} IncadesLevel;

typedef struct IncadesEngine IncadesEngine;

typedef struct IncadesKdTree IncadesKdTree;

/**
 * Engine settings. `max_window == 0` means an unbounded window.
 */
typedef struct {
  size_t max_window;
  size_t pool_size;
  uint64_t max_training;
  size_t k;
  double omega;
  bool overlap_filter;
  double beta;
  IncadesDetector detector;
  IncadesDistance distance;
  IncadesBackend backend;
  IncadesLearner learner;
} IncadesConfig;

typedef struct {
  uint32_t label;
  /**
   * True when the overlap filter answered without consulting the pool.
   */
  bool overlap_filter;
  size_t ensemble_size;
} IncadesPrediction;

typedef struct {
  IncadesLevel level;
  bool has_warning_start;
  uint64_t warning_start;
} IncadesSignal;

typedef struct {
  uint64_t instances_trained;
  uint64_t classifications;
  uint64_t drifts;
  uint64_t warnings;
  uint64_t overlap_hits;
  uint64_t ds_selections;
  uint64_t distance_computations;
  uint64_t rebuilds;
  size_t pool_len;
  size_t window_len;
} IncadesCounters;

typedef struct {
  uint64_t seq;
  uint32_t label;
  double distance;
} IncadesNeighbor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *incades_last_error(void);

/**
 * Writes the default engine settings into `out`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `IncadesConfig`.
 */
IncadesStatus incades_config_default(IncadesConfig *out);

/**
 * Creates an engine. A null `config` uses the defaults.
 *
 * # Safety
 * `config` must be null or valid; `out` must point to writable memory.
 */
IncadesStatus incades_engine_new(const IncadesConfig *config,
                                 size_t dim,
                                 size_t num_classes,
                                 IncadesEngine **out);

/**
 * # Safety
 * `engine` must be null or a handle from `incades_engine_new` not yet freed.
 */
void incades_engine_free(IncadesEngine *engine);

/**
 * Classifies one instance without training.
 *
 * # Safety
 * `engine` must be a live handle, `features` must hold `len` doubles and
 * `out` must be writable.
 */
IncadesStatus incades_engine_predict(IncadesEngine *engine,
                                     const double *features,
                                     size_t len,
                                     IncadesPrediction *out);

/**
 * Learns from one labeled instance. `signal` may be null.
 *
 * # Safety
 * As for `incades_engine_predict`; `signal` must be null or writable.
 */
IncadesStatus incades_engine_train(IncadesEngine *engine,
                                   const double *features,
                                   size_t len,
                                   uint32_t label,
                                   IncadesSignal *signal);

/**
 * Predicts, then learns from the same labeled instance.
 *
 * # Safety
 * As for `incades_engine_predict`.
 */
IncadesStatus incades_engine_test_then_train(IncadesEngine *engine,
                                             const double *features,
                                             size_t len,
                                             uint32_t label,
                                             IncadesPrediction *out);

/**
 * # Safety
 * `engine` must be a live handle and `out` writable.
 */
IncadesStatus incades_engine_counters(const IncadesEngine *engine, IncadesCounters *out);

/**
 * Creates an empty k-d tree.
 *
 * # Safety
 * `out` must point to writable memory.
 */
IncadesStatus incades_kdtree_new(size_t dim,
                                 double beta,
                                 IncadesDistance distance,
                                 IncadesKdTree **out);

/**
 * # Safety
 * `tree` must be null or a handle from `incades_kdtree_new` not yet freed.
 */
void incades_kdtree_free(IncadesKdTree *tree);

/**
 * Inserts a point, then rebuilds if the tree has become unbalanced or
 * too sparse.
 *
 * # Safety
 * `tree` must be a live handle and `features` must hold `len` doubles.
 */
IncadesStatus incades_kdtree_insert(IncadesKdTree *tree,
                                    const double *features,
                                    size_t len,
                                    uint32_t label,
                                    uint64_t seq);

/**
 * Marks a previously inserted point inactive. `removed` may be null and
 * receives whether an active match was found.
 *
 * # Safety
 * As for `incades_kdtree_insert`; `removed` must be null or writable.
 */
IncadesStatus incades_kdtree_remove(IncadesKdTree *tree,
                                    const double *features,
                                    size_t len,
                                    uint32_t label,
                                    uint64_t seq,
                                    bool *removed);

/**
 * Number of active points.
 *
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
IncadesStatus incades_kdtree_len(const IncadesKdTree *tree, size_t *out);

/**
 * Finds up to `k` nearest active points, nearest first, into `out`
 * (capacity `k`). `found` receives the number written.
 *
 * # Safety
 * `tree` must be a live handle, `query` must hold `len` doubles, `out`
 * must hold `k` neighbors and `found` must be writable.
 */
IncadesStatus incades_kdtree_knn(const IncadesKdTree *tree,
                                 const double *query,
                                 size_t len,
                                 size_t k,
                                 IncadesNeighbor *out,
                                 size_t *found);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INCADES_H */
