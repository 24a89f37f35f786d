#ifndef EFX_H
#define EFX_H

/* Generated by cbindgen from the efx-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a fallible FFI call.
 */
typedef enum EfxStatus {
  /**
   * The call succeeded.
   */
  EFX_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  EFX_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  EFX_STATUS_INVALID_UTF8 = 2,
  /**
   * The input could not be decoded (malformed JSON or rational).
   */
  EFX_STATUS_PARSE_ERROR = 3,
  /**
   * The input decoded but violates a semantic invariant.
   */
  EFX_STATUS_VALIDATION_ERROR = 4,
  /**
   * The allocation is not EFX; the witness is in the last error message.
   */
  EFX_STATUS_NOT_EFX = 5,
  /**
   * The solver hit its iteration cap before completing.
   */
  EFX_STATUS_ITERATION_CAP = 6,
  /**
   * An internal assertion or certification failed (a library bug).
   */
  EFX_STATUS_INTERNAL_ERROR = 7,
} EfxStatus;

/**
 * Which value order a verification runs under.
 */
typedef enum EfxValueMode {
  /**
   * True (raw) values; ties between distinct bundles are possible.
   */
  EFX_VALUE_MODE_RAW = 0,
  /**
   * The symbolic tie-broken order used inside the solver.
   */
  EFX_VALUE_MODE_SYMBOLIC = 1,
} EfxValueMode;

/**
 * Opaque handle to an allocation.
 */
typedef struct EfxAllocation EfxAllocation;

/**
 * Opaque handle to a problem instance.
 */
typedef struct EfxInstance EfxInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the most recent error message on this thread as a fresh
 * NUL-terminated string, or NULL if the last call succeeded. The caller
 * owns the string and must release it with [`efx_string_free`].
 */
char *efx_last_error(void);

/**
 * Releases a string returned by this library. NULL is a no-op.
 *
 * # Safety
 *
 * `s` must be NULL or a pointer previously returned by one of this
 * library's string-returning functions, not yet freed.
 */
void efx_string_free(char *s);

/**
 * Returns the library version as a static NUL-terminated string. Do not
 * free it.
 */
const char *efx_version(void);

/**
 * Parses an instance from its JSON document into a new handle stored in
 * `*out`. On any error `*out` is NULL. The handle must be released with
 * [`efx_instance_free`].
 *
 * # Safety
 *
 * `json` must be NULL or a valid NUL-terminated string; `out` must be a
 * valid pointer to writable memory for one pointer.
 */
enum EfxStatus efx_instance_from_json(const char *json, struct EfxInstance **out);

/**
 * Serializes an instance back to its JSON document. Returns NULL if
 * `instance` is NULL. The caller frees the string with
 * [`efx_string_free`].
 *
 * # Safety
 *
 * `instance` must be NULL or a live handle from
 * [`efx_instance_from_json`].
 */
char *efx_instance_to_json(const struct EfxInstance *instance);

/**
 * Number of agents in the instance; 0 if `instance` is NULL.
 *
 * # Safety
 *
 * `instance` must be NULL or a live handle.
 */
size_t efx_instance_agent_count(const struct EfxInstance *instance);

/**
 * Number of items in the instance; 0 if `instance` is NULL.
 *
 * # Safety
 *
 * `instance` must be NULL or a live handle.
 */
size_t efx_instance_item_count(const struct EfxInstance *instance);

/**
 * Releases an instance handle. NULL is a no-op.
 *
 * # Safety
 *
 * `instance` must be NULL or a live handle, not yet freed.
 */
void efx_instance_free(struct EfxInstance *instance);

/**
 * Parses an allocation from its JSON document into a new handle stored in
 * `*out`. On any error `*out` is NULL. The handle must be released with
 * [`efx_allocation_free`].
 *
 * # Safety
 *
 * `json` must be NULL or a valid NUL-terminated string; `out` must be a
 * valid pointer to writable memory for one pointer.
 */
enum EfxStatus efx_allocation_from_json(const char *json, struct EfxAllocation **out);

/**
 * Serializes an allocation back to its JSON document. Returns NULL if
 * `allocation` is NULL. The caller frees the string with
 * [`efx_string_free`].
 *
 * # Safety
 *
 * `allocation` must be NULL or a live handle.
 */
char *efx_allocation_to_json(const struct EfxAllocation *allocation);

/**
 * Releases an allocation handle. NULL is a no-op.
 *
 * # Safety
 *
 * `allocation` must be NULL or a live handle, not yet freed.
 */
void efx_allocation_free(struct EfxAllocation *allocation);

/**
 * Computes a complete EFX allocation for `instance`, storing a new handle
 * in `*out`. `max_steps` caps the improvement loop (pass 1000000 for the
 * default); `assert_lemmas` enables runtime checks of theorem-guaranteed
 * facts on every step. On any error `*out` is NULL and the message is
 * available via [`efx_last_error`].
 *
 * # Safety
 *
 * `instance` must be NULL or a live handle; `out` must be a valid pointer
 * to writable memory for one pointer.
 */
enum EfxStatus efx_solve(const struct EfxInstance *instance,
                         uint64_t max_steps,
                         bool assert_lemmas,
                         struct EfxAllocation **out);

/**
 * Checks that `allocation` is well-formed for `instance` and EFX under
 * `mode`. Returns `Ok`, `ValidationError`, or `NotEfx`; for the latter
 * two, [`efx_last_error`] describes the first violation or the envy
 * witness.
 *
 * # Safety
 *
 * `instance` and `allocation` must each be NULL or live handles.
 */
enum EfxStatus efx_verify(const struct EfxInstance *instance,
                          const struct EfxAllocation *allocation,
                          enum EfxValueMode mode);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EFX_H */
