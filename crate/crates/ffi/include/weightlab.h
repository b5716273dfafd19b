#ifndef WEIGHTLAB_H
#define WEIGHTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Convergence of a returned estimate.
 */
typedef enum WlConvergence {
  WL_CONVERGENCE_CONVERGENT = 0,
  WL_CONVERGENCE_DIVERGENT = 1,
  WL_CONVERGENCE_UNRESOLVED = 2,
} WlConvergence;

typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_UTF8 = 2,
  WL_STATUS_PARSE = 3,
  WL_STATUS_INVALID_PARAMS = 4,
  WL_STATUS_UNSUPPORTED = 5,
  WL_STATUS_BUDGET = 6,
  WL_STATUS_NUMERIC = 7,
  WL_STATUS_PANIC = 8,
} WlStatus;

/**
 * Opaque parsed weight or symbol.
 */
typedef struct WlWeight WlWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *wl_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *wl_version(void);

/**
 * Parses a weight or symbol in the DSL, e.g. `analytic:a=0.1`.
 *
 * # Safety
 * `dsl` must be a valid C string and `out` a valid pointer.
 */
enum WlStatus wl_weight_parse(const char *dsl, struct WlWeight **out);

/**
 * # Safety
 * `w` must come from [`wl_weight_parse`] and not be freed twice. Null is a no-op.
 */
void wl_weight_free(struct WlWeight *w);

/**
 * Canonical DSL form of a weight; release with [`wl_string_free`].
 *
 * # Safety
 * `w` must be a live weight and `out` a valid pointer.
 */
enum WlStatus wl_weight_to_string(const struct WlWeight *w, char **out);

/**
 * Value of the symbol at `re + i·im` in the unit disk.
 *
 * # Safety
 * `w` must be a live weight; the out pointers must be valid.
 */
enum WlStatus wl_weight_eval_disk(const struct WlWeight *w,
                                  double re,
                                  double im,
                                  double *out_re,
                                  double *out_im);

/**
 * Closed-form membership of `(1-|z|²)^ζ`; `invariant` selects the invariant class.
 *
 * # Safety
 * `out_member` must be a valid pointer.
 */
enum WlStatus wl_power_weight_oracle(double zeta,
                                     double p,
                                     double gamma,
                                     uint32_t n,
                                     bool invariant,
                                     bool *out_member);

/**
 * `B_γ(|w|)(z)` on the disk at grid level `level`.
 *
 * # Safety
 * `w` must be a live weight; the out pointers must be valid.
 */
enum WlStatus wl_berezin(const struct WlWeight *w,
                         double gamma,
                         double re,
                         double im,
                         uint32_t level,
                         double *out_value,
                         enum WlConvergence *out_convergence);

/**
 * Runs a CLI job from its JSON config. The report is returned even when the
 * job fails; `out_exit` receives the CLI exit code.
 *
 * # Safety
 * `config` must be a valid C string; the out pointers must be valid.
 */
enum WlStatus wl_run_job_json(const char *config, char **out_report, int *out_exit);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is a no-op.
 */
void wl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEIGHTLAB_H */
