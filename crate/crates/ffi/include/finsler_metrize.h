#ifndef FINSLER_METRIZE_H
#define FINSLER_METRIZE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by every function.
 */
typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_UTF8 = 2,
  FM_STATUS_CONFIG = 3,
  FM_STATUS_SINGULAR_METRIC = 4,
  FM_STATUS_DEGENERATE = 5,
  FM_STATUS_INADMISSIBLE = 6,
  /*
   Blow-up, domain exit or an undefined residual.
   */
  FM_STATUS_NUMERICAL = 7,
  /*
   A theorem branch could not produce a Lagrangian.
   */
  FM_STATUS_NO_LAGRANGIAN = 8,
  FM_STATUS_IO = 9,
  FM_STATUS_PANIC = 10,
} FmStatus;

/*
 Opaque scenario handle.
 */
typedef struct FmScenario FmScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a scenario from TOML text. On success `*out` owns a new handle
 that must be released with [`fm_scenario_free`].

 # Safety
 `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FmStatus fm_scenario_from_toml(const char *toml, struct FmScenario **out);

/*
 # Safety
 `s` must be null or a handle from [`fm_scenario_from_toml`] not yet freed.
 */
void fm_scenario_free(struct FmScenario *s);

/*
 Overrides the sampling seed.

 # Safety
 `s` must be a live handle.
 */
enum FmStatus fm_scenario_set_seed(struct FmScenario *s, uint64_t seed);

/*
 Overrides one decide tolerance by name, e.g. `"fit_residual"`.

 # Safety
 `s` must be a live handle and `key` a NUL-terminated string.
 */
enum FmStatus fm_scenario_set_tolerance(struct FmScenario *s, const char *key, double value);

/*
 Subfamily classification report.

 # Safety
 `s` must be a live handle; `json_out` a valid pointer; `exit_code` null
 or valid.
 */
enum FmStatus fm_classify(const struct FmScenario *s, char **json_out, int32_t *exit_code);

/*
 Metrizability report. `*exit_code` is 0 when a Lagrangian was emitted,
 2 otherwise.

 # Safety
 As for [`fm_classify`].
 */
enum FmStatus fm_decide(const struct FmScenario *s, char **json_out, int32_t *exit_code);

/*
 Verification report. `*exit_code` is 0 when every check passed.

 # Safety
 As for [`fm_classify`].
 */
enum FmStatus fm_verify(const struct FmScenario *s, char **json_out, int32_t *exit_code);

/*
 Γ^μ_{νρ}(x) written to `out[16 μ + 4 ν + ρ]`.

 # Safety
 `x` must point to 4 doubles and `out` to 64.
 */
enum FmStatus fm_connection_coefficients(const struct FmScenario *s, const double *x, double *out);

/*
 −Γ^μ_{νρ}(x) v^ν v^ρ written to `out[4]`.

 # Safety
 `x`, `v` and `out` must each point to 4 doubles.
 */
enum FmStatus fm_autoparallel_rhs(const struct FmScenario *s,
                                  const double *x,
                                  const double *v,
                                  double *out);

/*
 # Safety
 `p` must be null or a string returned by this library, freed once.
 */
void fm_string_free(char *p);

/*
 Message for the last failed call on this thread; empty after a
 successful one. Valid until the next call on the same thread.
 */
const char *fm_last_error(void);

/*
 Library version as a static string.
 */
const char *fm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINSLER_METRIZE_H */
