#ifndef RECONF_H
#define RECONF_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ReconfStatus {
  RECONF_STATUS_OK = 0,
  RECONF_STATUS_NULL_ARGUMENT = 1,
  RECONF_STATUS_INVALID_UTF8 = 2,
  RECONF_STATUS_SYNTAX = 3,
  RECONF_STATUS_MALFORMED = 4,
  RECONF_STATUS_CAPACITY = 5,
  RECONF_STATUS_INTERNAL = 6,
} ReconfStatus;

typedef enum ReconfVerdict {
  RECONF_VERDICT_PASS = 0,
  RECONF_VERDICT_FAIL = 1,
  RECONF_VERDICT_INCONCLUSIVE = 2,
} ReconfVerdict;

/**
 * A parsed program family.
 */
typedef struct ReconfFamily ReconfFamily;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a family from NUL-terminated `text` into `*out`.
 *
 * # Safety
 * `text` must be a valid C string and `out` a valid pointer.
 */
enum ReconfStatus reconf_family_parse(const char *text, struct ReconfFamily **out);

/**
 * Releases a family. Null is ignored.
 *
 * # Safety
 * `h` must come from [`reconf_family_parse`] and not be used afterwards.
 */
void reconf_family_free(struct ReconfFamily *h);

/**
 * The reconfigured single program, as source text.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum ReconfStatus reconf_family_reconfigure(const struct ReconfFamily *h,
                                            bool optimize,
                                            char **out);

/**
 * The variant for `config`, a comma-separated list of literals such as
 * `"A,!B"`.
 *
 * # Safety
 * `h` must be a live handle, `config` a valid C string and `out` a valid
 * pointer.
 */
enum ReconfStatus reconf_family_project(const struct ReconfFamily *h,
                                        const char *config,
                                        char **out);

/**
 * Union of the variants' outcomes from the all-zero store, as JSON.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum ReconfStatus reconf_family_outcomes(const struct ReconfFamily *h, uint64_t fuel, char **out);

/**
 * Compares the reconfigured program with the variants from the all-zero
 * store.
 *
 * # Safety
 * `h` must be a live handle and `verdict` a valid pointer.
 */
enum ReconfStatus reconf_family_check_equiv(const struct ReconfFamily *h,
                                            bool optimize,
                                            uint64_t fuel,
                                            enum ReconfVerdict *verdict);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void reconf_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *reconf_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECONF_H */
