#ifndef HALLMHD_H
#define HALLMHD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HmhdStatus {
  HMHD_STATUS_OK = 0,
  /**
   * A run finished but one of its monitors failed.
   */
  HMHD_STATUS_MONITOR_FAILED = 1,
  HMHD_STATUS_CONFIG = 2,
  HMHD_STATUS_NUMERIC = 3,
  HMHD_STATUS_NULL_POINTER = 4,
  HMHD_STATUS_INVALID_UTF8 = 5,
  HMHD_STATUS_IO = 6,
  HMHD_STATUS_FORMAT = 7,
  HMHD_STATUS_ARGUMENT = 8,
  HMHD_STATUS_PANIC = 9,
} HmhdStatus;

/**
 * Opaque simulation handle.
 */
typedef struct HmhdSim HmhdSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hmhd_last_error(void);

/**
 * Builds a simulation from key-value configuration text and stores the
 * handle in `*out`. Release it with [`hmhd_sim_free`].
 *
 * # Safety
 * `config` must be a nul-terminated string and `out` a valid pointer.
 */
enum HmhdStatus hmhd_sim_new(const char *config, struct HmhdSim **out);

/**
 * Advances `steps` time steps. On a numeric failure the state is left at
 * the last good step.
 *
 * # Safety
 * `sim` must come from [`hmhd_sim_new`] and not be freed.
 */
enum HmhdStatus hmhd_sim_step(struct HmhdSim *sim, uint32_t steps);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum HmhdStatus hmhd_sim_time(const struct HmhdSim *sim, double *out);

/**
 * Kinetic plus magnetic energy ½(‖u‖² + ‖B‖²), mean-square normalized.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum HmhdStatus hmhd_sim_energy(const struct HmhdSim *sim, double *out);

/**
 * ‖u‖² + ‖B‖² + ‖u − εJ‖² in Ḣ^{1/2}.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum HmhdStatus hmhd_sim_triple_norm_sq(const struct HmhdSim *sim, double *out);

/**
 * # Safety
 * `sim` must be a live handle and `path` a nul-terminated string.
 */
enum HmhdStatus hmhd_sim_write_snapshot(const struct HmhdSim *sim, const char *path);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `sim` must come from [`hmhd_sim_new`] and not be used afterwards.
 */
void hmhd_sim_free(struct HmhdSim *sim);

/**
 * Runs a full configuration, writing artifacts into its `out` directory.
 * Returns `MonitorFailed` when the run completes but a monitor fails.
 *
 * # Safety
 * `config` must be a nul-terminated string.
 */
enum HmhdStatus hmhd_run_config(const char *config);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALLMHD_H */
