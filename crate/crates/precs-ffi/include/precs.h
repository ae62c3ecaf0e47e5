#ifndef PRECS_H
#define PRECS_H

/* This file is generated by cbindgen from precs-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum PrecsStatus {
  PRECS_STATUS_OK = 0,
  PRECS_STATUS_IO_ERROR = 1,
  PRECS_STATUS_CONFIG_ERROR = 2,
  PRECS_STATUS_COVERAGE_ERROR = 3,
  PRECS_STATUS_NUMERIC_ERROR = 4,
  PRECS_STATUS_NULL_POINTER = 5,
  PRECS_STATUS_INVALID_UTF8 = 6,
} PrecsStatus;

// Opaque run-configuration handle.
typedef struct PrecsConfig PrecsConfig;

// Opaque trajectory handle: rows of
// (t, ρ_++, ρ_−−, Re ρ_+−, Im ρ_+−, trace_dev, min_eig).
typedef struct PrecsTrajectory PrecsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the most recent error message on this thread into `buf` (always
// NUL-terminated, truncated to `cap` bytes). Returns the full length of the
// message including the terminator; call with `cap` 0 to size a buffer.
//
// # Safety
// `buf` must point to at least `cap` writable bytes, or be NULL when `cap`
// is 0.
size_t precs_last_error(char *buf, size_t cap);

// Parse and validate a JSON run configuration.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer; on
// success `*out` owns a handle that must be released with
// [`precs_config_free`].
enum PrecsStatus precs_config_from_json(const char *json, struct PrecsConfig **out);

// Load and validate a JSON run configuration from a file.
//
// # Safety
// As for [`precs_config_from_json`], with `path` a NUL-terminated path.
enum PrecsStatus precs_config_from_file(const char *path, struct PrecsConfig **out);

// Release a configuration handle. NULL is a no-op.
//
// # Safety
// `config` must have been returned by one of the constructors and not
// freed before.
void precs_config_free(struct PrecsConfig *config);

// Run the decomposition pipeline: writes `field.csv` and
// `decompose_report.json` into the configured output directory and reports
// the two headline numbers through the optional out-parameters.
//
// # Safety
// `config` must be a live handle; the out-pointers may be NULL or must be
// writable.
enum PrecsStatus precs_run_decompose(const struct PrecsConfig *config,
                                     double *chi2_norm_dev,
                                     double *reconstruction_err);

// Assemble the point-local operator field at time `t`: writes
// `f_field.csv` and `lindblad_report.json`. `max_span_residual` receives
// NaN for models without a span structure check.
//
// # Safety
// As for [`precs_run_decompose`].
enum PrecsStatus precs_run_lindblad_field(const struct PrecsConfig *config,
                                          double t,
                                          double *gksl_trace_abs,
                                          double *max_span_residual);

// Integrate the dynamics with `engine` ("exact", "gksl", or "decoupled"):
// writes the trajectory CSV and report, and, when `out` is non-NULL, hands
// back a trajectory handle to be released with [`precs_trajectory_free`].
//
// # Safety
// `config` must be a live handle, `engine` NUL-terminated; `out` may be
// NULL.
enum PrecsStatus precs_run_evolve(const struct PrecsConfig *config,
                                  const char *engine,
                                  struct PrecsTrajectory **out);

// Number of sampled rows in a trajectory.
//
// # Safety
// `traj` must be a live handle and `len` writable.
enum PrecsStatus precs_trajectory_len(const struct PrecsTrajectory *traj, size_t *len);

// Copy row `index` into `row`: t, ρ_++, ρ_−−, Re ρ_+−, Im ρ_+−, trace_dev,
// min_eig.
//
// # Safety
// `traj` must be a live handle and `row` must point to at least 7 writable
// doubles.
enum PrecsStatus precs_trajectory_row(const struct PrecsTrajectory *traj,
                                      size_t index,
                                      double *row);

// Release a trajectory handle. NULL is a no-op.
//
// # Safety
// `traj` must have been returned by [`precs_run_evolve`] and not freed
// before.
void precs_trajectory_free(struct PrecsTrajectory *traj);

// One-period rate curves over a coupling ladder: writes the per-coupling
// CSVs, `fractions.csv`, and `gamma_report.json`. Pass `g_list` = NULL with
// `g_count` = 0 for the default ladder {1,2,4,8}·ω.
//
// # Safety
// `config` must be a live handle; when non-NULL, `g_list` must point to
// `g_count` readable doubles; `monotone` may be NULL or must be writable.
enum PrecsStatus precs_run_gamma_curve(const struct PrecsConfig *config,
                                       const double *g_list,
                                       size_t g_count,
                                       bool *monotone);

// The dephasing rate T(t) = ½ e^{−|β|²} |sin(gβ)|² of the pure-dephasing
// model. Returns NaN (and records the error) for invalid parameters.
double precs_dephasing_rate(double omega, double g, double t);

// Fraction of one period the normalized dephasing rate spends below
// `threshold`, sampled at `samples` points.
//
// # Safety
// `fraction` must be writable.
enum PrecsStatus precs_subthreshold_fraction(double omega,
                                             double g,
                                             double threshold,
                                             size_t samples,
                                             double *fraction);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRECS_H */
