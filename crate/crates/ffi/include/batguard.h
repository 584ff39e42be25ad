#ifndef BATGUARD_H
#define BATGUARD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BgStatus {
  BG_STATUS_OK = 0,
  BG_STATUS_NULL_POINTER = 1,
  BG_STATUS_INVALID_UTF8 = 2,
  BG_STATUS_IO = 3,
  BG_STATUS_DATA = 4,
  BG_STATUS_FORMAT = 5,
  BG_STATUS_DIMENSION = 6,
  BG_STATUS_DEGENERATE = 7,
  BG_STATUS_CONFIG = 8,
  BG_STATUS_FITNESS = 9,
  BG_STATUS_PANIC = 10,
} BgStatus;

/**
 * Opaque trained model.
 */
typedef struct BgModel BgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bg_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *bg_last_error_message(void);

/**
 * Parse a model bundle from a JSON string.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BgStatus bg_model_load_json(const char *json, struct BgModel **out);

/**
 * Read a model bundle from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BgStatus bg_model_load_file(const char *path, struct BgModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from `bg_model_load_*` not yet freed.
 */
void bg_model_free(struct BgModel *model);

/**
 * Number of raw columns each input row must have.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum BgStatus bg_model_input_dim(const struct BgModel *model, size_t *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum BgStatus bg_model_threshold(const struct BgModel *model, double *out);

/**
 * Reconstruction error for each of `n_rows` row-major rows.
 *
 * # Safety
 * `rows` must hold `n_rows * n_cols` doubles and `out_scores` room for
 * `n_rows` doubles.
 */
enum BgStatus bg_model_score(const struct BgModel *model,
                             const double *rows,
                             size_t n_rows,
                             size_t n_cols,
                             double *out_scores);

/**
 * 1 for rows whose error exceeds the threshold, else 0.
 *
 * # Safety
 * As [`bg_model_score`], with `out_labels` holding `n_rows` bytes.
 */
enum BgStatus bg_model_classify(const struct BgModel *model,
                                const double *rows,
                                size_t n_rows,
                                size_t n_cols,
                                uint8_t *out_labels);

/**
 * Area under the ROC curve with fraud (1) as the positive class.
 *
 * # Safety
 * `labels` and `scores` must each hold `n` elements; `out` must be writable.
 */
enum BgStatus bg_metrics_auc(const uint8_t *labels, const double *scores, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BATGUARD_H */
