#ifndef VARALG_H
#define VARALG_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Values 0 to 2 match the exit codes of the command-line tool.
typedef enum va_status {
  VA_OK = 0,
  // The call ran to completion and at least one check failed.
  VA_CHECK_FAILED = 1,
  // Invalid configuration, expression or dimensions.
  VA_CONFIG = 2,
  // Singular Lagrangian, non-finite state or another numerical failure.
  VA_NUMERICAL = 3,
  VA_NULL_POINTER = 4,
  // Input string is not valid UTF-8 or an index is out of range.
  VA_INVALID_ARGUMENT = 5,
  // A Rust panic was caught at the boundary.
  VA_PANIC = 6,
} va_status;

// A validated system built from a JSON configuration.
typedef struct va_system va_system;

// A sampled solution. States hold `x` followed by `y_1 .. y_{2k-1}`.
typedef struct va_trajectory va_trajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *va_version(void);

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library on the same thread.
const char *va_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void va_string_free(char *s);

// Builds a system from a JSON configuration.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for one write.
enum va_status va_system_from_json(const char *json, struct va_system **out);

// Builds the system of a bundled scenario by name.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be valid for one write.
enum va_status va_system_from_scenario(const char *name, struct va_system **out);

// # Safety
// `sys` must be null or a handle from this library that was not yet freed.
void va_system_free(struct va_system *sys);

// Writes base rank `n`, fibre rank `m` and Lagrangian order `k`.
//
// # Safety
// `sys` must be a live handle; each out pointer must be null or writable.
enum va_status va_system_dims(const struct va_system *sys, size_t *n, size_t *m, size_t *k);

// Runs the structure, morphism, operator, symmetry and regularity checks.
// Returns `VA_CHECK_FAILED` when a check fails; the JSON report is written
// to `report_json` in both cases when it is non-null.
//
// # Safety
// `sys` must be a live handle; `report_json` must be null or writable.
enum va_status va_system_check(const struct va_system *sys, char **report_json);

// Integrates the system over its configured run. The trajectory is written
// whenever integration completes, including when a drift check fails.
//
// # Safety
// `sys` must be a live handle; `out` must be writable; `report_json` must be
// null or writable.
enum va_status va_system_simulate(const struct va_system *sys,
                                  struct va_trajectory **out,
                                  char **report_json);

// # Safety
// `traj` must be null or a handle from this library that was not yet freed.
void va_trajectory_free(struct va_trajectory *traj);

// Number of grid points, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t va_trajectory_len(const struct va_trajectory *traj);

// Length of one state vector, `n + (2k-1) m`, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t va_trajectory_state_dim(const struct va_trajectory *traj);

// Copies the time grid into `buf`, which must hold `va_trajectory_len` values.
//
// # Safety
// `traj` must be a live handle and `buf` valid for `len` writes.
enum va_status va_trajectory_times(const struct va_trajectory *traj, double *buf, size_t len);

// Copies the state at grid point `i` into `buf`, which must hold
// `va_trajectory_state_dim` values.
//
// # Safety
// `traj` must be a live handle and `buf` valid for `len` writes.
enum va_status va_trajectory_state(const struct va_trajectory *traj,
                                   size_t i,
                                   double *buf,
                                   size_t len);

// Writes the trajectory as CSV with a header row.
//
// # Safety
// `traj` must be a live handle; `out` must be writable.
enum va_status va_trajectory_to_csv(const struct va_trajectory *traj, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARALG_H */
