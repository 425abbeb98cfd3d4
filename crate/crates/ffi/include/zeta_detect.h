#ifndef ZETA_DETECT_H
#define ZETA_DETECT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define ZD_OK 0

#define ZD_ERR_NULL 1

#define ZD_ERR_CONFIG 2

#define ZD_ERR_RANGE 3

#define ZD_ERR_PRECONDITION 4

#define ZD_ERR_INPUT 5

#define ZD_ERR_RESOURCE 6

// Construction, invariant or numerical failure of a checked claim.
#define ZD_ERR_ASSERTION 7

#define ZD_ERR_IO 8

#define ZD_ERR_PANIC 9

typedef struct ZdTables ZdTables;

typedef struct ZdWeight ZdWeight;

typedef struct ZdZeroSet ZdZeroSet;

typedef struct ZdComplex {
  double re;
  double im;
} ZdComplex;

typedef struct ZdResidual {
  double residual;
  double tail_bound;
  uintptr_t zeros_in_window;
  bool within_bound;
} ZdResidual;

typedef struct ZdDichotomy {
  double indicator;
  double type1_magnitude;
  double type2_magnitude;
  uint64_t best_n;
  bool type1_passed;
  bool type2_passed;
  bool identity_holds;
  bool passed;
} ZdDichotomy;

typedef struct ZdSearch {
  double t_star;
  double value;
  double certified_gap;
  uintptr_t grid_points;
} ZdSearch;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next call.
const char *zd_last_error_message(void);

// # Safety
// `out` must be a valid pointer.
int32_t zd_weight_new(struct ZdWeight **out);

// # Safety
// `w` must come from `zd_weight_new` or be null.
void zd_weight_free(struct ZdWeight *w);

// w₀(x).
//
// # Safety
// Pointers must be valid.
int32_t zd_weight_eval(const struct ZdWeight *w, double x, double *value);

// W₀(s) with its error estimate.
//
// # Safety
// Pointers must be valid; `err` may be null.
int32_t zd_mellin_w0(const struct ZdWeight *w,
                     struct ZdComplex s,
                     struct ZdComplex *value,
                     double *err);

// # Safety
// `out` must be a valid pointer.
int32_t zd_tables_new(uintptr_t limit, struct ZdTables **out);

// # Safety
// `t` must come from `zd_tables_new` or be null.
void zd_tables_free(struct ZdTables *t);

// Λ(n), μ(n) for n ≤ limit.
//
// # Safety
// Pointers must be valid; either output may be null.
int32_t zd_tables_lookup(const struct ZdTables *t, uintptr_t n, double *lambda, int8_t *mu);

// S_Y(s) = Σ Λ(n) n^{-s} w₀(n/Y).
//
// # Safety
// Pointers must be valid.
int32_t zd_prime_sum(const struct ZdTables *t,
                     const struct ZdWeight *w,
                     struct ZdComplex s,
                     double y,
                     struct ZdComplex *value);

// The bundled table of zeta zeros.
//
// # Safety
// `out` must be a valid pointer.
int32_t zd_zeros_fixture(struct ZdZeroSet **out);

// Synthetic set from parallel arrays, declared complete on every height.
//
// # Safety
// `betas` and `gammas` must point to `len` values each (may be null when `len` is 0).
int32_t zd_zeros_from_arrays(const double *betas,
                             const double *gammas,
                             uintptr_t len,
                             struct ZdZeroSet **out);

// # Safety
// `z` must come from a `zd_zeros_*` constructor or be null.
void zd_zeros_free(struct ZdZeroSet *z);

// # Safety
// Pointers must be valid.
int32_t zd_zeros_len(const struct ZdZeroSet *z, uintptr_t *len);

// β and γ of the zero at `index` (sorted by γ).
//
// # Safety
// Pointers must be valid.
int32_t zd_zeros_get(const struct ZdZeroSet *z, uintptr_t index, double *beta, double *gamma);

// Explicit-formula residual at the zero `index` with smoothing length `u`, scale T = `t`.
//
// # Safety
// Pointers must be valid.
int32_t zd_explicit_formula_residual(const struct ZdZeroSet *z,
                                     uintptr_t index,
                                     double u,
                                     double t,
                                     const struct ZdTables *tables,
                                     const struct ZdWeight *w,
                                     struct ZdResidual *result);

// Type I / Type II dichotomy at ρ = β + iγ and scale T = `t`.
//
// # Safety
// Pointers must be valid.
int32_t zd_dichotomy(double beta,
                     double gamma,
                     double t,
                     const struct ZdTables *tables,
                     struct ZdDichotomy *result);

// Certified max over [A, 2A] of |Σ_{r<R} e^{2πi r t/R}|.
//
// # Safety
// `result` must be a valid pointer.
int32_t zd_power_sum_vertical_ap(uintptr_t r, double a, double tolerance, struct ZdSearch *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZETA_DETECT_H */
