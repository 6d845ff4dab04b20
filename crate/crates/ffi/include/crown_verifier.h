#ifndef CROWN_VERIFIER_H
#define CROWN_VERIFIER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Outcome of a verdict.
 */
typedef enum CvOutcome {
  CV_OUTCOME_HOLDS = 0,
  CV_OUTCOME_COUNTEREXAMPLE = 1,
  CV_OUTCOME_HYPOTHESIS_NOT_MET = 2,
} CvOutcome;

/**
 * Result of a call.
 */
typedef enum CvStatus {
  CV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CV_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not UTF-8.
   */
  CV_STATUS_UTF8 = 2,
  /**
   * Malformed or invalid input: instance, verdict, coloring.
   */
  CV_STATUS_INPUT = 3,
  CV_STATUS_TIMEOUT = 4,
  CV_STATUS_UNKNOWN_STATEMENT = 5,
  /**
   * The library panicked; the handles passed in are still valid.
   */
  CV_STATUS_INTERNAL = 6,
} CvStatus;

/**
 * A plane graph with lists, a path and the optional gluing inputs.
 */
typedef struct CvInstance CvInstance;

/**
 * The result of `cv_verify`, or a verdict read back from JSON.
 */
typedef struct CvVerdict CvVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *cv_last_error(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void cv_string_free(char *s);

/**
 * Parses an instance from its JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum CvStatus cv_instance_from_json(const char *json, struct CvInstance **out);

/**
 * The built-in Figure 1 instance.
 */
struct CvInstance *cv_instance_figure1(void);

/**
 * The instance as JSON.
 *
 * # Safety
 * `inst` must be a live handle and `out` writable.
 */
enum CvStatus cv_instance_to_json(const struct CvInstance *inst, char **out);

/**
 * Number of vertices of the instance, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t cv_instance_vertex_count(const struct CvInstance *inst);

/**
 * Releases an instance. Null is ignored.
 *
 * # Safety
 * `inst` must come from this library and not have been freed.
 */
void cv_instance_free(struct CvInstance *inst);

/**
 * Verifies statement `stmt` (for example `"THM_2_1_THOMASSEN"`) on `inst`.
 * A `timeout_ms` of 0 means no limit. With `conclusion_only` set the
 * hypotheses are not checked first, for statements that allow it.
 *
 * # Safety
 * `stmt` must be a NUL-terminated string, `inst` a live handle and `out`
 * writable.
 */
enum CvStatus cv_verify(const char *stmt,
                        const struct CvInstance *inst,
                        uint64_t timeout_ms,
                        bool conclusion_only,
                        struct CvVerdict **out);

/**
 * Reads a verdict from its JSON line.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum CvStatus cv_verdict_from_json(const char *json, struct CvVerdict **out);

/**
 * The outcome of a verdict.
 *
 * # Safety
 * `v` must be a live handle and `out` writable.
 */
enum CvStatus cv_verdict_outcome(const struct CvVerdict *v, enum CvOutcome *out);

/**
 * The verdict as one JSON line.
 *
 * # Safety
 * `v` must be a live handle and `out` writable.
 */
enum CvStatus cv_verdict_to_json(const struct CvVerdict *v, char **out);

/**
 * Releases a verdict. Null is ignored.
 *
 * # Safety
 * `v` must come from this library and not have been freed.
 */
void cv_verdict_free(struct CvVerdict *v);

/**
 * Rechecks a verdict's certificate against `inst` independently of the
 * search that produced it. `conclusion_only` must match the setting the
 * verdict was produced with.
 *
 * # Safety
 * `v` and `inst` must be live handles and `ok` writable.
 */
enum CvStatus cv_recheck(const struct CvVerdict *v,
                         const struct CvInstance *inst,
                         bool conclusion_only,
                         bool *ok);

/**
 * Extends a precoloring, given as a JSON object from vertex to color such
 * as `{"0": 1}` (null for none), to an L-coloring of the whole graph.
 * Writes `{"status":"SAT","coloring":[...]}` or `{"status":"UNSAT"}`.
 *
 * # Safety
 * `inst` must be a live handle, `coloring` null or a NUL-terminated
 * string, and `out` writable.
 */
enum CvStatus cv_solve(const struct CvInstance *inst,
                       const char *coloring,
                       uint64_t timeout_ms,
                       char **out);

/**
 * Whether Crown_L(P, G) is empty for the instance's path. When it is not,
 * and `element` is non-null, the first element is written there as JSON
 * pairs `[[v, c], ...]`; otherwise null is written.
 *
 * # Safety
 * `inst` must be a live handle, `empty` writable, and `element` null or
 * writable.
 */
enum CvStatus cv_crown_empty(const struct CvInstance *inst,
                             uint64_t timeout_ms,
                             bool *empty,
                             char **element);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROWN_VERIFIER_H */
