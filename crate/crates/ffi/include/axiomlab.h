#ifndef AXIOMLAB_H
#define AXIOMLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AxlStatus {
  /**
   * Success, or the checked property holds.
   */
  AXL_STATUS_OK = 0,
  /**
   * The checked property does not hold; the report carries a witness.
   */
  AXL_STATUS_FAIL = 1,
  AXL_STATUS_NULL_POINTER = 2,
  AXL_STATUS_INVALID_UTF8 = 3,
  /**
   * Malformed JSON or an invalid instance, profile or rule.
   */
  AXL_STATUS_INVALID_INPUT = 4,
  AXL_STATUS_SIZE_OVERFLOW = 5,
  AXL_STATUS_NOT_APPLICABLE = 6,
  AXL_STATUS_PRECONDITION_VIOLATED = 7,
  AXL_STATUS_IO = 8,
  /**
   * A panic was caught at the boundary.
   */
  AXL_STATUS_INTERNAL = 9,
} AxlStatus;

/**
 * An instance with its object names.
 */
typedef struct AxlInstance AxlInstance;

/**
 * A preference profile for one instance.
 */
typedef struct AxlProfile AxlProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *axl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *axl_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void axl_string_free(char *s);

/**
 * Parses an instance from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AxlStatus axl_instance_from_json(const char *json, struct AxlInstance **out);

/**
 * # Safety
 * `inst` must come from [`axl_instance_from_json`] and not be used afterwards.
 */
void axl_instance_free(struct AxlInstance *inst);

/**
 * Number of agents, or 0 for NULL.
 *
 * # Safety
 * `inst` must be NULL or a live instance handle.
 */
uintptr_t axl_instance_num_agents(const struct AxlInstance *inst);

/**
 * Number of objects including any null-object, or 0 for NULL.
 *
 * # Safety
 * `inst` must be NULL or a live instance handle.
 */
uintptr_t axl_instance_num_objects(const struct AxlInstance *inst);

/**
 * Parses a profile (lists of object names) for `inst`.
 *
 * # Safety
 * `inst` must be a live instance, `json` NUL-terminated and `out` valid.
 */
enum AxlStatus axl_profile_from_json(const struct AxlInstance *inst,
                                     const char *json,
                                     struct AxlProfile **out);

/**
 * # Safety
 * `profile` must come from [`axl_profile_from_json`] and not be used afterwards.
 */
void axl_profile_free(struct AxlProfile *profile);

/**
 * Exact random serial dictatorship lottery as JSON: a list of
 * `{"matching": [...], "weight": "p/q"}`.
 *
 * # Safety
 * Handles must be live and belong together; `out` must be valid.
 */
enum AxlStatus axl_rsd_json(const struct AxlInstance *inst,
                            const struct AxlProfile *profile,
                            char **out);

/**
 * Checks `rule` (`rsd`, `sd`, `sd:2,0,1`, `ttc`, ... or a rule-table path)
 * against `axiom` on every profile. Returns `OK` on pass and `FAIL` on
 * failure; the JSON report is written to `out` in both cases.
 *
 * # Safety
 * `inst` must be live, strings NUL-terminated and `out` valid.
 */
enum AxlStatus axl_check_rule(const struct AxlInstance *inst,
                              const char *rule,
                              const char *axiom,
                              char **out);

/**
 * Runs the lottery-rule theorem harness. `OK` when verified, `FAIL` when
 * refuted or when the hypotheses do not hold (see the report's status).
 *
 * # Safety
 * `inst` must be live, `rule` NUL-terminated and `out` valid.
 */
enum AxlStatus axl_verify_theorem1(const struct AxlInstance *inst, const char *rule, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AXIOMLAB_H */
