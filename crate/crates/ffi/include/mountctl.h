#ifndef MOUNTCTL_H
#define MOUNTCTL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of values per trace row: t, θ1, θ2, θ̇1, θ̇2, τ1, τ2, e1, e2.
 */
#define MOUNT_TRACE_COLUMNS 9

/**
 * Result code of every fallible call.
 */
typedef enum MountStatus {
  MOUNT_STATUS_OK = 0,
  MOUNT_STATUS_NULL_POINTER = 1,
  MOUNT_STATUS_INVALID_ARGUMENT = 2,
  MOUNT_STATUS_PARSE = 3,
  MOUNT_STATUS_DIVERGED = 4,
  MOUNT_STATUS_NUMERICAL = 5,
  MOUNT_STATUS_OUT_OF_RANGE = 6,
  MOUNT_STATUS_PANIC = 7,
} MountStatus;

/**
 * Opaque fuzzy controller definition.
 */
typedef struct MountFuzzy MountFuzzy;

/**
 * Opaque plant parameters.
 */
typedef struct MountPlant MountPlant;

/**
 * Opaque simulation result, remembering the reference it tracked.
 */
typedef struct MountTrace MountTrace;

/**
 * Step experiment settings; the mount starts at rest at zero.
 */
typedef struct MountSimConfig {
  double step_size;
  double duration;
  /**
   * Set-point in radians.
   */
  double theta_desired[2];
} MountSimConfig;

/**
 * Step metrics; absent values are NaN.
 */
typedef struct MountMetrics {
  double rise_time[2];
  double settling_time[2];
  double overshoot_pct[2];
  double itae;
} MountMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on this thread.
 */
const char *mount_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mount_version(void);

/**
 * Creates the default mount profile.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MountStatus mount_plant_default(struct MountPlant **out);

/**
 * Creates a plant from inertia coefficients, gravity off.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MountStatus mount_plant_new(double a1, double a2, double a3, struct MountPlant **out);

/**
 * # Safety
 * `plant` must be NULL or a handle from `mount_plant_*` not yet freed.
 */
void mount_plant_free(struct MountPlant *plant);

/**
 * Creates the default fuzzy controller.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MountStatus mount_fuzzy_default(struct MountFuzzy **out);

/**
 * Parses a fuzzy definition in the text format written by `mountctl`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer to
 * writable storage for one handle.
 */
enum MountStatus mount_fuzzy_from_text(const char *text, struct MountFuzzy **out);

/**
 * Serializes a fuzzy definition. Free the result with `mount_string_free`.
 *
 * # Safety
 * `fuzzy` must be a live handle and `out` a valid pointer.
 */
enum MountStatus mount_fuzzy_to_text(const struct MountFuzzy *fuzzy, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void mount_string_free(char *s);

/**
 * Commanded acceleration for position error `e` and error rate `e_dot`.
 *
 * # Safety
 * `fuzzy` must be a live handle and `out` a valid pointer.
 */
enum MountStatus mount_fuzzy_output(const struct MountFuzzy *fuzzy,
                                    double e,
                                    double e_dot,
                                    double *out);

/**
 * # Safety
 * `fuzzy` must be NULL or a live handle.
 */
void mount_fuzzy_free(struct MountFuzzy *fuzzy);

/**
 * Default experiment: 1 ms steps for 3 s towards 60° and 50°.
 */
struct MountSimConfig mount_sim_config_default(void);

/**
 * Simulates the computed-torque PD loop.
 *
 * # Safety
 * `plant` must be a live handle, `kp` and `kd` must each point to two
 * doubles, `cfg` to a config and `out` to writable storage for one handle.
 */
enum MountStatus mount_simulate_pd(const struct MountPlant *plant,
                                   const double *kp,
                                   const double *kd,
                                   const struct MountSimConfig *cfg,
                                   struct MountTrace **out);

/**
 * Simulates the computed-torque fuzzy loop.
 *
 * # Safety
 * All pointers must be valid; `out` receives a new trace handle.
 */
enum MountStatus mount_simulate_fuzzy(const struct MountPlant *plant,
                                      const struct MountFuzzy *fuzzy,
                                      const struct MountSimConfig *cfg,
                                      struct MountTrace **out);

/**
 * Number of rows in a trace; 0 for NULL.
 *
 * # Safety
 * `trace` must be NULL or a live handle.
 */
size_t mount_trace_len(const struct MountTrace *trace);

/**
 * Copies row `k` into `row`, which must hold `MOUNT_TRACE_COLUMNS` doubles.
 *
 * # Safety
 * `trace` must be a live handle and `row` valid for that many writes.
 */
enum MountStatus mount_trace_row(const struct MountTrace *trace, size_t k, double *row);

/**
 * Step metrics of a trace against the set-point it was run with.
 *
 * # Safety
 * `trace` must be a live handle and `out` a valid pointer.
 */
enum MountStatus mount_trace_metrics(const struct MountTrace *trace, struct MountMetrics *out);

/**
 * # Safety
 * `trace` must be NULL or a live handle.
 */
void mount_trace_free(struct MountTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOUNTCTL_H */
