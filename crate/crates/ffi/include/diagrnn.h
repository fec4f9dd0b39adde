#ifndef DIAGRNN_H
#define DIAGRNN_H

/* Generated by cbindgen from diagrnn-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum DrStatus {
  DR_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  DR_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument failed validation (dimensions, names, JSON schema).
   */
  DR_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A string argument was not valid UTF-8.
   */
  DR_STATUS_INVALID_UTF8 = 3,
  /**
   * The computation itself failed.
   */
  DR_STATUS_RUNTIME_ERROR = 4,
} DrStatus;

/**
 * An opaque trained-model handle: parameters plus activation.
 */
typedef struct DrModel DrModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dr_version(void);

/**
 * Static description of a status code.
 */
const char *dr_status_message(enum DrStatus status);

/**
 * Creates a symmetrically initialized model.
 *
 * `activation` is one of "tanh", "logistic", "gauss-bump". On success the
 * handle is written to `out` and must be released with [`dr_model_free`].
 *
 * # Safety
 * `activation` must point to a NUL-terminated string and `out` must be a
 * valid pointer.
 */
enum DrStatus dr_model_create(uintptr_t m,
                              uintptr_t d,
                              double alpha,
                              uint64_t seed,
                              const char *activation,
                              struct DrModel **out);

/**
 * Releases a model handle. NULL is a no-op.
 *
 * # Safety
 * `model` must be NULL or a pointer returned by [`dr_model_create`] that
 * has not been freed yet.
 */
void dr_model_free(struct DrModel *model);

/**
 * Width of the model.
 *
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t dr_model_width(const struct DrModel *model);

/**
 * Network outputs `F_1..F_T` for a column-major `d x t_len` input.
 * `out` must have room for `t_len` values.
 *
 * # Safety
 * `model`, `x` and `out` must be valid; `x` must hold `d * t_len` doubles
 * and `out` must hold `t_len`.
 */
enum DrStatus dr_model_output(const struct DrModel *model,
                              const double *x,
                              uintptr_t d,
                              uintptr_t t_len,
                              double *out);

/**
 * Largest per-neuron hidden-state gradient norm for each step prefix
 * (the exploding-gradient diagnostic). `out` must hold `t_len` values.
 *
 * # Safety
 * As for [`dr_model_output`].
 */
enum DrStatus dr_model_gradient_sup(const struct DrModel *model,
                                    const double *x,
                                    uintptr_t d,
                                    uintptr_t t_len,
                                    double *out);

/**
 * Evaluates every analytic constant for a configuration. The request is a
 * JSON `BoundInputs` object (same schema as the CLI `bounds` section);
 * the result is the full report as JSON.
 *
 * # Safety
 * `request_json` must be NUL-terminated; `out_json` must be valid. The
 * returned string is released with [`dr_string_free`].
 */
enum DrStatus dr_bounds_report_json(const char *request_json, char **out_json);

/**
 * Runs one training job. The request is a JSON object with the CLI
 * `train` section schema; the result is the full training report as JSON.
 *
 * # Safety
 * As for [`dr_bounds_report_json`].
 */
enum DrStatus dr_train_run_json(const char *request_json, char **out_json);

/**
 * Assembles a kernel Gram matrix. The request is a JSON object with the
 * CLI `kernel` section schema; the result holds the matrix, mode and
 * per-entry standard errors (for mc mode) as JSON.
 *
 * # Safety
 * As for [`dr_bounds_report_json`].
 */
enum DrStatus dr_kernel_gram_json(const char *request_json, char **out_json);

/**
 * Releases a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a pointer returned by a `*_json` function of this
 * library that has not been freed yet.
 */
void dr_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DIAGRNN_H */
