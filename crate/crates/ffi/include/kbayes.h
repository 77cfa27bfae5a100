#ifndef KBAYES_H
#define KBAYES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KbStatus {
  KB_STATUS_OK = 0,
  KB_STATUS_NULL_POINTER = 1,
  KB_STATUS_INVALID_ARGUMENT = 2,
  KB_STATUS_IO = 3,
  KB_STATUS_PARSE = 4,
  KB_STATUS_DIMENSION = 5,
  KB_STATUS_PANIC = 6,
} KbStatus;

/**
 * Encoded dataset: numeric attribute matrix plus class ids.
 */
typedef struct KbDataset KbDataset;

typedef struct KbModel KbModel;

/**
 * Classifier kind and hyperparameters.
 */
typedef struct KbSpec KbSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *kb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kb_version(void);

/**
 * Parses a `key = value` classifier block (`kind` required).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum KbStatus kb_spec_parse(const char *text, struct KbSpec **out);

/**
 * # Safety
 * `spec` must come from `kb_spec_parse` and not be used afterwards. NULL is ignored.
 */
void kb_spec_free(struct KbSpec *spec);

/**
 * Loads the dataset described by a manifest file. The manifest's feature subset is
 * applied.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum KbStatus kb_dataset_load_manifest(const char *path, struct KbDataset **out);

/**
 * Builds a dataset from a row-major `rows x cols` matrix and `rows` class ids.
 *
 * # Safety
 * `x` must hold `rows * cols` doubles, `y` `rows` values; `out` must be writable.
 */
enum KbStatus kb_dataset_from_arrays(const double *x,
                                     size_t rows,
                                     size_t cols,
                                     const size_t *y,
                                     size_t n_classes,
                                     struct KbDataset **out);

/**
 * # Safety
 * `ds` must be a live dataset handle or NULL (returns 0).
 */
size_t kb_dataset_rows(const struct KbDataset *ds);

/**
 * # Safety
 * `ds` must be a live dataset handle or NULL (returns 0).
 */
size_t kb_dataset_cols(const struct KbDataset *ds);

/**
 * # Safety
 * `ds` must be a live dataset handle or NULL (returns 0).
 */
size_t kb_dataset_n_classes(const struct KbDataset *ds);

/**
 * New dataset with the listed attribute columns, in the given order.
 *
 * # Safety
 * `indices` must hold `n` values; `out` must be writable.
 */
enum KbStatus kb_dataset_select_features(const struct KbDataset *ds,
                                         const size_t *indices,
                                         size_t n,
                                         struct KbDataset **out);

/**
 * # Safety
 * `ds` must be a dataset handle not used afterwards. NULL is ignored.
 */
void kb_dataset_free(struct KbDataset *ds);

/**
 * Trains on every row of `ds`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum KbStatus kb_model_fit(const struct KbSpec *spec,
                           const struct KbDataset *ds,
                           struct KbModel **out);

/**
 * Predicts a class id for each row of a row-major `rows x cols` matrix.
 *
 * # Safety
 * `x` must hold `rows * cols` doubles and `labels` room for `rows` values.
 */
enum KbStatus kb_model_predict(const struct KbModel *model,
                               const double *x,
                               size_t rows,
                               size_t cols,
                               size_t *labels);

/**
 * Per-class scores for one query row. Naive Bayes kinds report natural logs.
 *
 * # Safety
 * `x` must hold `cols` doubles, `scores` room for `n_scores` values (at least the
 * class count); `predicted` may be NULL.
 */
enum KbStatus kb_model_score(const struct KbModel *model,
                             const double *x,
                             size_t cols,
                             double *scores,
                             size_t n_scores,
                             size_t *predicted);

/**
 * # Safety
 * `model` must be a model handle not used afterwards. NULL is ignored.
 */
void kb_model_free(struct KbModel *model);

/**
 * Resampled k-fold cross-validation; writes the mean accuracy over resamples and,
 * when `per_resample` is not NULL, each resample's accuracy (`resamples` values).
 *
 * # Safety
 * Handles must be live; `mean` must be writable.
 */
enum KbStatus kb_cross_validate(const struct KbSpec *spec,
                                const struct KbDataset *ds,
                                size_t folds,
                                size_t resamples,
                                uint64_t seed,
                                bool stratified,
                                double *mean,
                                double *per_resample);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KBAYES_H */
