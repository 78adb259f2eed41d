#ifndef FULFILLMENT_H
#define FULFILLMENT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Bumped on any incompatible change to the exported functions.
 */
#define FF_ABI_VERSION 1

typedef enum ff_status {
  FF_STATUS_OK = 0,
  FF_STATUS_NULL_ARGUMENT = 1,
  FF_STATUS_INVALID_UTF8 = 2,
  FF_STATUS_PARSE = 3,
  FF_STATUS_INVALID_INSTANCE = 4,
  FF_STATUS_CONFIG = 5,
  FF_STATUS_DOMAIN = 6,
  FF_STATUS_INFEASIBLE = 7,
  FF_STATUS_STATE_SPACE = 8,
  FF_STATUS_SOLVER = 9,
  FF_STATUS_UNSUPPORTED = 10,
  FF_STATUS_IO = 11,
  FF_STATUS_BAD_ORDER = 12,
  FF_STATUS_BAD_COSTS = 13,
  FF_STATUS_BUFFER_TOO_SMALL = 14,
  FF_STATUS_INTERNAL = 15,
  FF_STATUS_PANIC = 16,
} ff_status;

/**
 * A loaded problem instance.
 */
typedef struct ff_instance ff_instance;

/**
 * A multi-session store speaking the line-delimited JSON protocol.
 */
typedef struct ff_service ff_service;

/**
 * One online policy run, fed one period at a time.
 */
typedef struct ff_session ff_session;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t ff_abi_version(void);

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ff_last_error(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ff_string_free(char *s);

/**
 * Parses an instance from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ff_status ff_instance_parse(const char *json, struct ff_instance **out);

/**
 * Reads an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ff_status ff_instance_read(const char *path, struct ff_instance **out);

/**
 * # Safety
 * `inst` must come from `ff_instance_parse`/`ff_instance_read` or be NULL.
 */
void ff_instance_free(struct ff_instance *inst);

/**
 * Item count, FDC count (excluding the RDC) and horizon. Any output may be NULL.
 *
 * # Safety
 * `inst` must be a live instance handle.
 */
enum ff_status ff_instance_dims(const struct ff_instance *inst,
                                size_t *n,
                                size_t *k,
                                size_t *horizon);

/**
 * Runs a policy over the whole instance. `policy` is a policy name or a JSON
 * policy object. Either output may be NULL.
 *
 * # Safety
 * `inst` must be a live handle and `policy` a NUL-terminated string.
 */
enum ff_status ff_run_policy(const struct ff_instance *inst,
                             const char *policy,
                             uint64_t seed,
                             double *total_cost,
                             size_t *gated_periods);

/**
 * Clairvoyant optimum by exhaustive search. `max_states` of 0 keeps the
 * default limit; exceeding the limit returns `FF_STATUS_STATE_SPACE`.
 *
 * # Safety
 * `inst` must be a live handle; `opt_cost` must be writable.
 */
enum ff_status ff_optimal_cost(const struct ff_instance *inst,
                               uint64_t max_states,
                               double *opt_cost);

/**
 * Evaluates a named competitive-ratio bound, e.g. `"cost-comparison-v-priority-upper"`.
 * Pass NaN for `a`, `b` or `theta` to leave them unset.
 *
 * # Safety
 * `bound` must be a NUL-terminated string and `fdc_fixed` must point to `k` doubles.
 */
enum ff_status ff_bound_value(const char *bound,
                              double f0,
                              const double *fdc_fixed,
                              size_t k,
                              double a,
                              double b,
                              double theta,
                              double *out);

/**
 * Opens an online session from an instance header in JSON (no costs or orders).
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum ff_status ff_session_open(const char *header_json,
                               const char *policy,
                               uint64_t seed,
                               struct ff_session **out);

/**
 * Opens an online session using an instance's header; its costs and orders
 * are not fed automatically.
 *
 * # Safety
 * `inst` must be a live handle, `policy` NUL-terminated, `out` writable.
 */
enum ff_status ff_session_open_for(const struct ff_instance *inst,
                                   const char *policy,
                                   uint64_t seed,
                                   struct ff_session **out);

/**
 * Decides and applies one period.
 *
 * `order` holds `n` quantities. `costs` holds the period's variable costs as
 * `(k + 1) * n` doubles, RDC row first. The plan is written to `plan_out`
 * in the same layout; `plan_len` must be at least `(k + 1) * n`. A rejected
 * period leaves the session unchanged. `period_cost` and `gated` may be NULL.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum ff_status ff_session_decide(struct ff_session *session,
                                 const int64_t *order,
                                 size_t order_len,
                                 const double *costs,
                                 size_t costs_len,
                                 int64_t *plan_out,
                                 size_t plan_len,
                                 double *period_cost,
                                 bool *gated);

/**
 * Periods decided so far and their total cost. Either output may be NULL.
 *
 * # Safety
 * `session` must be a live handle.
 */
enum ff_status ff_session_state(const struct ff_session *session,
                                size_t *periods,
                                double *cumulative_cost);

/**
 * Remaining stock of `item` at FDC `fdc` (1-based; the RDC is 0 and unlimited).
 *
 * # Safety
 * `session` must be a live handle; `level` must be writable.
 */
enum ff_status ff_session_stock(const struct ff_session *session,
                                size_t fdc,
                                size_t item,
                                int64_t *level);

/**
 * # Safety
 * `session` must come from `ff_session_open*` or be NULL.
 */
void ff_session_free(struct ff_session *session);

/**
 * Creates a protocol service. With a non-NULL `journal_path`, existing
 * journal entries are replayed and new requests are appended.
 *
 * # Safety
 * `journal_path` must be NULL or NUL-terminated; `out` must be writable.
 */
enum ff_status ff_service_new(const char *journal_path, struct ff_service **out);

/**
 * Handles one request line and returns the response line, to be released
 * with `ff_string_free`. Protocol-level rejections are reported inside the
 * response, not through the status. Safe to call from several threads on
 * the same service.
 *
 * # Safety
 * `service` must be live, `request` NUL-terminated, `response` writable.
 */
enum ff_status ff_service_handle(const struct ff_service *service,
                                 const char *request,
                                 char **response);

/**
 * # Safety
 * `service` must come from `ff_service_new` or be NULL.
 */
void ff_service_free(struct ff_service *service);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FULFILLMENT_H */
