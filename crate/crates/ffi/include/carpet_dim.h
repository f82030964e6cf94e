#ifndef CARPET_DIM_H
#define CARPET_DIM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the non-zero values match the command-line exit codes
 * where one exists.
 */
typedef enum CarpetStatus {
  CARPET_STATUS_OK = 0,
  /**
   * The system or an argument failed validation.
   */
  CARPET_STATUS_INVALID = 2,
  /**
   * A numerical routine failed to converge or bracket.
   */
  CARPET_STATUS_NUMERIC = 3,
  CARPET_STATUS_IO = 4,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  CARPET_STATUS_BAD_ARGUMENT = 64,
  /**
   * A Rust panic was caught at the boundary.
   */
  CARPET_STATUS_INTERNAL = 70,
} CarpetStatus;

/**
 * Opaque validated system.
 */
typedef struct CarpetSystem CarpetSystem;

/**
 * Headline dimension quantities of a system.
 */
typedef struct CarpetDimensions {
  /**
   * Maximum of the Ledrappier-Young expression over Bernoulli weights.
   */
  double alpha_star;
  /**
   * Root of the box-counting equation.
   */
  double s;
  /**
   * Affinity dimension.
   */
  double s_a;
  /**
   * Box dimension of the projection onto the horizontal axis.
   */
  double s_h;
} CarpetDimensions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a system from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CarpetStatus carpet_system_from_json(const char *json, struct CarpetSystem **out);

/**
 * Builds a gallery entry; `n_params == 0` selects its default parameters.
 *
 * # Safety
 * `name` must be a NUL-terminated string, `params` must point to `n_params`
 * doubles (or be null when `n_params` is 0) and `out` must be writable.
 */
enum CarpetStatus carpet_system_from_gallery(const char *name,
                                             const double *params,
                                             uintptr_t n_params,
                                             struct CarpetSystem **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `system` must be null or a handle not yet freed.
 */
void carpet_system_free(struct CarpetSystem *system);

/**
 * Number of maps, or 0 for a null handle.
 *
 * # Safety
 * `system` must be null or a live handle.
 */
uintptr_t carpet_system_len(const struct CarpetSystem *system);

/**
 * Computes the headline dimensions.
 *
 * # Safety
 * `system` must be a live handle and `out` writable.
 */
enum CarpetStatus carpet_dimensions(const struct CarpetSystem *system,
                                    struct CarpetDimensions *out);

/**
 * Full dimension report as JSON with sorted keys.
 *
 * # Safety
 * `system` must be a live handle and `out` writable; free the result with
 * `carpet_string_free`.
 */
enum CarpetStatus carpet_dimension_report_json(const struct CarpetSystem *system, char **out);

/**
 * Separation and overlap conditions as JSON with sorted keys.
 *
 * # Safety
 * `system` must be a live handle and `out` writable; free the result with
 * `carpet_string_free`.
 */
enum CarpetStatus carpet_condition_report_json(const struct CarpetSystem *system, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void carpet_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *carpet_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *carpet_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARPET_DIM_H */
