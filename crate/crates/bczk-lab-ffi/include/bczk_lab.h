#ifndef BCZK_LAB_H
#define BCZK_LAB_H

/* Generated with cbindgen:0.26.0 */

/* Generated by cbindgen from bczk-lab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every entry point.
 */
typedef enum BczkLabStatus {
  BCZK_LAB_STATUS_OK = 0,
  /**
   * A pointer was null or an argument malformed.
   */
  BCZK_LAB_STATUS_INVALID_ARGUMENT = 1,
  /**
   * A derived quantity does not fit the integer width in use.
   */
  BCZK_LAB_STATUS_OUT_OF_RANGE = 2,
  /**
   * The experiment ran but at least one criterion failed.
   */
  BCZK_LAB_STATUS_CRITERION_FAILED = 3,
  /**
   * Execution error (I/O, configuration, protocol).
   */
  BCZK_LAB_STATUS_EXECUTION_ERROR = 4,
  /**
   * The caller's buffer was too small; required size is reported.
   */
  BCZK_LAB_STATUS_BUFFER_TOO_SMALL = 5,
} BczkLabStatus;

/**
 * Opaque parameter handle.
 */
typedef struct BczkLabParams BczkLabParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bczk_lab_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated if
 * needed) and reports the full length through `written`.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes; `written` must be valid or
 * null.
 */
void bczk_lab_last_error(char *buf, size_t cap, size_t *written);

/**
 * Derives the polynomial-profile parameters for (q, lambda).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BczkLabStatus bczk_lab_params_derive(uint64_t q, uint64_t lambda, struct BczkLabParams **out);

/**
 * Builds a desk-scale profile (slots/2 + gap threshold structure).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BczkLabStatus bczk_lab_params_desk(uint64_t slots,
                                        uint64_t blocks,
                                        uint64_t gap,
                                        uint64_t q,
                                        struct BczkLabParams **out);

/**
 * Frees a parameter handle. Null is a no-op.
 *
 * # Safety
 * `p` must have come from a `bczk_lab_params_*` constructor and not have
 * been freed already.
 */
void bczk_lab_params_free(struct BczkLabParams *p);

/**
 * Reads one numeric field of a parameter handle. Keys: "q", "lambda",
 * "slots", "blocks", "block_len", "prot_len", "threshold".
 *
 * # Safety
 * `p`, `key`, and `out` must be valid; `key` NUL-terminated.
 */
enum BczkLabStatus bczk_lab_params_get(const struct BczkLabParams *p,
                                       const char *key,
                                       uint64_t *out);

/**
 * Renders the flat key-value record (one `key=value` per line) into the
 * caller's buffer, NUL-terminated.
 *
 * # Safety
 * `p` must be valid; `buf` must point to `cap` writable bytes; `written`
 * must be valid.
 */
enum BczkLabStatus bczk_lab_params_record(const struct BczkLabParams *p,
                                          char *buf,
                                          size_t cap,
                                          size_t *written);

/**
 * Exact-rational verification of the block-coverage, rigging, and
 * combination inequalities at one (q, lambda) point.
 *
 * # Safety
 * `holds` must be a valid pointer.
 */
enum BczkLabStatus bczk_lab_bound_check(uint64_t q, uint64_t lambda, bool *holds);

/**
 * ln P[Bin(n, p) >= k]; exact big-integer arithmetic at p = 1/2.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BczkLabStatus bczk_lab_binom_tail_log(uint64_t n, double p, uint64_t k, double *out);

/**
 * Closed-form conditioned quantities of the cloning attack after `i`
 * iterations at witness density `eps`.
 *
 * # Safety
 * `delta` and `prod_alpha` must be valid pointers.
 */
enum BczkLabStatus bczk_lab_closed_form_delta(double eps,
                                              uint32_t i,
                                              double *delta,
                                              double *prod_alpha);

/**
 * Runs one experiment from a TOML config string, writing `results.jsonl`
 * and `summary.csv` under `out_dir`. Returns `Ok` when every criterion
 * passed and `CriterionFailed` when the run completed with a failing
 * criterion.
 *
 * # Safety
 * `config_toml` and `out_dir` must be valid NUL-terminated UTF-8 strings.
 */
enum BczkLabStatus bczk_lab_run_experiment(const char *config_toml,
                                           const char *out_dir,
                                           uint32_t workers);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BCZK_LAB_H */
