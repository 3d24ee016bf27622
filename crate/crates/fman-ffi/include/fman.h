#ifndef FMAN_H
#define FMAN_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the CLI exit contract, plus FFI-specific cases.
 */
typedef enum {
  FMAN_STATUS_OK = 0,
  FMAN_STATUS_CHECK_FAILED = 1,
  FMAN_STATUS_INPUT_ERROR = 2,
  FMAN_STATUS_NULL_ARGUMENT = 3,
  FMAN_STATUS_PANIC = 4,
} FmanStatus;

/**
 * Opaque manifold handle.
 */
typedef struct FmanManifold FmanManifold;

/**
 * Opaque report handle.
 */
typedef struct FmanReport FmanReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fman_last_error(void);

/**
 * Loads a manifold from a definition file path or a `gallery:NAME` URI.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be a valid pointer.
 */
FmanStatus fman_manifold_load(const char *spec, FmanManifold **out);

/**
 * Parses a manifold from definition-file text (TOML).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
FmanStatus fman_manifold_from_toml(const char *text, FmanManifold **out);

/**
 * # Safety
 * `man` must come from a successful load and not have been freed.
 */
void fman_manifold_free(FmanManifold *man);

/**
 * Chart dimension 2n+s; 0 if `man` is null.
 *
 * # Safety
 * `man` must be null or a live manifold handle.
 */
uint32_t fman_manifold_dim(const FmanManifold *man);

/**
 * Number of structure vector fields s; 0 if `man` is null.
 *
 * # Safety
 * `man` must be null or a live manifold handle.
 */
uint32_t fman_manifold_s(const FmanManifold *man);

/**
 * Runs the full verification (axioms plus every applicable identity).
 * Returns `Ok` when every check passes, `CheckFailed` when the report
 * contains failures (the report is produced either way).
 *
 * # Safety
 * `man` must be a live manifold handle; `out` must be a valid pointer.
 */
FmanStatus fman_verify(const FmanManifold *man,
                       uint32_t points,
                       uint64_t seed,
                       double tol,
                       FmanReport **out);

/**
 * Extracts the characteristic functions at one point by the pointwise
 * least-squares route. `point` must hold `fman_manifold_dim` values;
 * `alpha_out` and `beta_out` must hold `fman_manifold_s` values each.
 * `residual_out` may be null.
 *
 * # Safety
 * All pointers must be valid for the documented lengths.
 */
FmanStatus fman_extract_at(const FmanManifold *man,
                           const double *point,
                           double *alpha_out,
                           double *beta_out,
                           double *residual_out);

/**
 * 1 when every check in the report passed, else 0.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
int32_t fman_report_passed(const FmanReport *report);

/**
 * The machine-readable report as a JSON string; free with
 * `fman_string_free`.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
char *fman_report_json(const FmanReport *report);

/**
 * # Safety
 * `report` must come from `fman_verify` and not have been freed.
 */
void fman_report_free(FmanReport *report);

/**
 * # Safety
 * `s` must come from `fman_report_json` and not have been freed.
 */
void fman_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FMAN_H */
