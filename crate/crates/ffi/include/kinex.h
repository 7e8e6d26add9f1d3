#ifndef KINEX_H
#define KINEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// `λ = c1` for every agent; `c2` is ignored.
#define KX_RULE_CONSTANT 0

// `λ(w) = c1 (1 - exp(-c2 w))`.
#define KX_RULE_EXP_SATURATING 1

// Sigmoid around the population mean with `c1 < 1/2`.
#define KX_RULE_SIGMOID 2

// One redistribution among all agents per sweep.
#define KX_TOPOLOGY_GLOBAL 0

// Random disjoint pairs.
#define KX_TOPOLOGY_BINARY 1

// Random disjoint groups of `group_size`.
#define KX_TOPOLOGY_NARY 2

typedef enum KxStatus {
  KX_STATUS_OK = 0,
  KX_STATUS_NULL_POINTER = 1,
  KX_STATUS_INVALID_ARGUMENT = 2,
  KX_STATUS_INVALID_STATE = 3,
  KX_STATUS_INSUFFICIENT_DATA = 4,
  KX_STATUS_NUMERIC = 5,
  KX_STATUS_PANIC = 6,
  KX_STATUS_INTERNAL = 7,
} KxStatus;

// Opaque simulation handle.
typedef struct KxSimulation KxSimulation;

typedef struct KxDipResult {
  double dip;
  double p_value;
  size_t n;
  size_t null_reps;
} KxDipResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next `kx_` call on the same thread.
const char *kx_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *kx_version(void);

// Creates a simulation of `n_agents` agents of size 1. `group_size` is read
// for `KX_TOPOLOGY_NARY` only. The handle is written to `*out`.
//
// # Safety
// `out` must be NULL or a valid pointer to writable storage for one pointer.
enum KxStatus kx_simulation_new(size_t n_agents,
                                uint32_t rule_kind,
                                double c1,
                                double c2,
                                uint32_t topology,
                                size_t group_size,
                                uint64_t seed,
                                struct KxSimulation **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `sim` must be NULL or a handle from [`kx_simulation_new`] not yet freed.
void kx_simulation_free(struct KxSimulation *sim);

// Advances by `sweeps` sweeps.
//
// # Safety
// `sim` must be NULL or a live handle not used concurrently from another thread.
enum KxStatus kx_simulation_sweep(struct KxSimulation *sim, uint64_t sweeps);

// Number of agents, or 0 for NULL.
//
// # Safety
// `sim` must be NULL or a live handle.
size_t kx_simulation_len(const struct KxSimulation *sim);

// Sweeps performed so far, or 0 for NULL.
//
// # Safety
// `sim` must be NULL or a live handle.
uint64_t kx_simulation_time(const struct KxSimulation *sim);

// Copies the current sizes into `out`, which must hold exactly
// `kx_simulation_len(sim)` values.
//
// # Safety
// `sim` must be NULL or a live handle; `out` must be NULL or point to `len` writable doubles.
enum KxStatus kx_simulation_sizes(const struct KxSimulation *sim, double *out, size_t len);

// Copies the current retention rates into `out` (same length rule as sizes).
//
// # Safety
// As [`kx_simulation_sizes`].
enum KxStatus kx_simulation_lambdas(const struct KxSimulation *sim, double *out, size_t len);

// Dip statistic of `len` values in any order.
//
// # Safety
// `values` must point to `len` readable doubles; `out` must be NULL or writable.
enum KxStatus kx_dip_statistic(const double *values, size_t len, double *out);

// Dip statistic with a p-value from `null_reps` uniform samples of the same
// size, drawn from `seed`.
//
// # Safety
// `values` must point to `len` readable doubles; `out` must be NULL or writable.
enum KxStatus kx_dip_test(const double *values,
                          size_t len,
                          size_t null_reps,
                          uint64_t seed,
                          struct KxDipResult *out);

// Fills `out[0..n]` with a point drawn uniformly from the probability simplex.
// Stream `stream` of `seed` is used, so distinct streams give independent draws.
//
// # Safety
// `out` must point to `n` writable doubles.
enum KxStatus kx_simplex_sample(uint64_t seed, uint64_t stream, double *out, size_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KINEX_H */
