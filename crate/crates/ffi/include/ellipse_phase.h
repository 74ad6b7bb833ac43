#ifndef ELLIPSE_PHASE_H
#define ELLIPSE_PHASE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum EpStatus {
  EP_STATUS_OK = 0,
  // Malformed or inconsistent input (degenerate lattice, bad JSON, ...).
  EP_STATUS_INVALID_INPUT = 1,
  // A numerical routine could not reach its accuracy.
  EP_STATUS_NUMERICAL = 2,
  EP_STATUS_IO = 3,
  EP_STATUS_NULL_POINTER = 4,
  // A Rust panic was caught at the boundary.
  EP_STATUS_PANIC = 5,
} EpStatus;

typedef enum EpValueKind {
  EP_VALUE_KIND_FINITE = 0,
  EP_VALUE_KIND_ZERO = 1,
  EP_VALUE_KIND_POLE = 2,
} EpValueKind;

// Opaque sigma evaluator bound to a lattice.
typedef struct EpEvaluator EpEvaluator;

// Opaque period lattice.
typedef struct EpLattice EpLattice;

// Opaque synthesized function together with its evaluator.
typedef struct EpSpec EpSpec;

typedef struct EpComplex {
  double re;
  double im;
} EpComplex;

// A function value as `ln|w|` and `arg w ∈ (-π, π]`, or a zero/pole marker
// with its order (in which case `log_mag` is ∓inf and `phase` is 0).
typedef struct EpValue {
  enum EpValueKind kind;
  uint32_t order;
  double log_mag;
  double phase;
} EpValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread (empty if none).
// The pointer stays valid until the next failing call on this thread.
const char *ep_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void ep_string_free(char *s);

// # Safety
// `out_lattice` must be a valid pointer to writable storage for a handle.
enum EpStatus ep_lattice_new(struct EpComplex p1,
                             struct EpComplex p2,
                             struct EpLattice **out_lattice);

// # Safety
// `lattice` must be null or a handle from [`ep_lattice_new`] not yet freed.
void ep_lattice_free(struct EpLattice *lattice);

// Reduces `z` into the half-open fundamental cell: `z = z0 + m·p1 + n·p2`.
//
// # Safety
// Pointers must be valid; `m` and `n` may be null if not wanted.
enum EpStatus ep_lattice_reduce(const struct EpLattice *lattice,
                                struct EpComplex z,
                                struct EpComplex *z0,
                                int64_t *m,
                                int64_t *n);

// Evaluator using the nome series (`shells == 0`) or the truncated product
// over `shells` square shells.
//
// # Safety
// `lattice` must be a live handle and `out_evaluator` writable.
enum EpStatus ep_evaluator_new(const struct EpLattice *lattice,
                               size_t shells,
                               struct EpEvaluator **out_evaluator);

// # Safety
// `ev` must be null or a live evaluator handle.
void ep_evaluator_free(struct EpEvaluator *ev);

// σ(z) in log form; a lattice point yields a zero marker.
//
// # Safety
// `ev` must be a live handle and `value` writable.
enum EpStatus ep_sigma(const struct EpEvaluator *ev, struct EpComplex z, struct EpValue *value);

// Quasi-period `η_j` for `j` = 1 or 2.
//
// # Safety
// `ev` must be a live handle and `eta` writable.
enum EpStatus ep_eta(const struct EpEvaluator *ev, uint8_t j, struct EpComplex *eta);

// `v_j` of the four-sigma identity, from the quasi-period (`shells == 0`)
// or the symmetrized lattice sum over `shells` shells. `error_bound` may
// be null.
//
// # Safety
// `lattice` must be a live handle and `v` writable.
enum EpStatus ep_v_constant(const struct EpLattice *lattice,
                            struct EpComplex xi0,
                            uint8_t j,
                            size_t shells,
                            struct EpComplex *v,
                            double *error_bound);

// Synthesizes `f` from a divisor given as JSON
// (`{"zeros": [[re, im, mult], ...], "poles": [...]}`) and integers `m1, m2`.
//
// # Safety
// `lattice` must be a live handle, `divisor_json` a NUL-terminated string
// and `out_spec` writable.
enum EpStatus ep_synthesize(const struct EpLattice *lattice,
                            const char *divisor_json,
                            int64_t m1,
                            int64_t m2,
                            struct EpSpec **out_spec);

// Loads a spec from the JSON written by [`ep_spec_to_json`] or the CLI.
//
// # Safety
// `json` must be a NUL-terminated string and `out_spec` writable.
enum EpStatus ep_spec_from_json(const char *json, struct EpSpec **out_spec);

// # Safety
// `spec` must be null or a live spec handle.
void ep_spec_free(struct EpSpec *spec);

// # Safety
// `spec` must be a live handle and `json` writable. Free the result with
// [`ep_string_free`].
enum EpStatus ep_spec_to_json(const struct EpSpec *spec, char **json);

// `ξ0`, the exponent `a` and the log-multipliers `α1, α2` of a spec. Any
// output pointer may be null.
//
// # Safety
// `spec` must be a live handle; non-null outputs must be writable, and
// `alpha` must have room for two doubles.
enum EpStatus ep_spec_params(const struct EpSpec *spec,
                             struct EpComplex *xi0,
                             struct EpComplex *a,
                             double *alpha);

// `f(z)` of a synthesized spec.
//
// # Safety
// `spec` must be a live handle and `value` writable.
enum EpStatus ep_spec_eval(const struct EpSpec *spec, struct EpComplex z, struct EpValue *value);

// Runs the verification harness on an `nx × ny` grid and writes the
// report as JSON. `passed` (may be null) tells whether every residual met
// `tol`; a failed check is not an error status.
//
// # Safety
// `spec` must be a live handle and `report_json` writable. Free the
// report with [`ep_string_free`].
enum EpStatus ep_spec_verify(const struct EpSpec *spec,
                             size_t nx,
                             size_t ny,
                             uint64_t seed,
                             double tol,
                             char **report_json,
                             bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELLIPSE_PHASE_H */
