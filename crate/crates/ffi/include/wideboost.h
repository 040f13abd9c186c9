#ifndef WIDEBOOST_H
#define WIDEBOOST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum WbTask {
  WB_TASK_REGRESSION = 0,
  WB_TASK_BINARY = 1,
  WB_TASK_MULTICLASS = 2,
} WbTask;

typedef enum WbBetaKind {
  WB_BETA_KIND_I = 0,
  WB_BETA_KIND_IN = 1,
  WB_BETA_KIND_R = 2,
  WB_BETA_KIND_RN = 3,
} WbBetaKind;

typedef enum WbStatus {
  WB_STATUS_OK = 0,
  WB_STATUS_NULL_POINTER = 1,
  WB_STATUS_INVALID_UTF8 = 2,
  WB_STATUS_IO = 3,
  WB_STATUS_PARSE = 4,
  WB_STATUS_INVALID_ARGUMENT = 5,
  WB_STATUS_DIMENSION = 6,
  WB_STATUS_MODEL = 7,
  WB_STATUS_TRAINING = 8,
  WB_STATUS_BUFFER_TOO_SMALL = 9,
  WB_STATUS_PANIC = 10,
} WbStatus;

/**
 * Opaque trained model.
 */
typedef struct WbModel WbModel;

/**
 * Training settings. Start from `wb_params_default` and override fields.
 */
typedef struct WbParams {
  enum WbTask task;
  enum WbBetaKind beta_kind;
  /**
   * Output width `q`.
   */
  size_t q;
  uint64_t beta_seed;
  size_t rounds;
  double learning_rate;
  size_t max_depth;
  double min_child_weight;
  double lambda;
  double gamma;
  size_t min_samples_leaf;
  double base_score;
} WbParams;

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wb_last_error(void);

/**
 * Standard boosting defaults for a task with label dimension `d`:
 * `q = d`, `β = I`, 100 rounds, η = 0.1, depth 6, λ = 1, γ = 0.
 */
struct WbParams wb_params_default(enum WbTask task, size_t d);

/**
 * Trains a model. `x` is `n_rows × n_features`; `y` is `n_rows × label_dim`
 * (one-hot rows for multiclass, 0/1 for binary). On success `*out` owns a new
 * model that must be released with `wb_model_free`.
 *
 * # Safety
 * `x` and `y` must point to buffers of the stated sizes; `params` and `out`
 * must be valid pointers.
 */
enum WbStatus wb_train(const double *x,
                       size_t n_rows,
                       size_t n_features,
                       const double *y,
                       size_t label_dim,
                       const struct WbParams *params,
                       struct WbModel **out);

/**
 * Loads a model file written by `wb_model_save` or the command-line tool.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WbStatus wb_model_load(const char *path, struct WbModel **out);

/**
 * # Safety
 * `model` must come from this library; `path` must be NUL-terminated.
 */
enum WbStatus wb_model_save(const struct WbModel *model, const char *path);

/**
 * Parses a model from its JSON text.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` a valid pointer.
 */
enum WbStatus wb_model_from_json(const char *json, struct WbModel **out);

/**
 * Serializes a model. `*out` receives a string to release with
 * `wb_string_free`.
 *
 * # Safety
 * `model` must come from this library and `out` must be a valid pointer.
 */
enum WbStatus wb_model_to_json(const struct WbModel *model, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by `wb_model_to_json`.
 */
void wb_string_free(char *s);

/**
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void wb_model_free(struct WbModel *model);

/**
 * Reports the feature count, width `q`, label dimension `d` and round
 * count. Any output pointer may be null.
 *
 * # Safety
 * `model` must come from this library.
 */
enum WbStatus wb_model_dims(const struct WbModel *model,
                            size_t *n_features,
                            size_t *width,
                            size_t *label_dim,
                            size_t *rounds);

/**
 * Writes the `n_rows × d` output scores `F·β` into `out`.
 *
 * # Safety
 * `x` must hold `n_rows × n_features` values and `out` `out_len` values.
 */
enum WbStatus wb_model_predict(const struct WbModel *model,
                               const double *x,
                               size_t n_rows,
                               size_t n_features,
                               double *out,
                               size_t out_len);

/**
 * Writes one predicted class index per row (classification models only).
 *
 * # Safety
 * `x` must hold `n_rows × n_features` values and `out` `out_len` values.
 */
enum WbStatus wb_model_predict_labels(const struct WbModel *model,
                                      const double *x,
                                      size_t n_rows,
                                      size_t n_features,
                                      size_t *out,
                                      size_t out_len);

/**
 * Writes the `q × d` matrix β for the given construction into `out`.
 *
 * # Safety
 * `out` must hold `out_len` values.
 */
enum WbStatus wb_beta_build(enum WbBetaKind kind,
                            size_t q,
                            size_t d,
                            uint64_t seed,
                            double *out,
                            size_t out_len);

#endif  /* WIDEBOOST_H */
