#ifndef KLOOSTER_H
#define KLOOSTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KloosterMethod {
  KLOOSTER_METHOD_DIRECT = 0,
  KLOOSTER_METHOD_CRT = 1,
} KloosterMethod;

typedef enum KloosterStatus {
  KLOOSTER_STATUS_OK = 0,
  KLOOSTER_STATUS_NULL_POINTER = 1,
  KLOOSTER_STATUS_INVALID_ARGUMENT = 2,
  KLOOSTER_STATUS_NOT_COPRIME = 3,
  KLOOSTER_STATUS_NOT_SQUAREFREE = 4,
  KLOOSTER_STATUS_NOT_INVERTIBLE = 5,
  KLOOSTER_STATUS_OUT_OF_RANGE = 6,
  KLOOSTER_STATUS_RESOURCE_LIMIT = 7,
  KLOOSTER_STATUS_OVERFLOW = 8,
  KLOOSTER_STATUS_CORRUPT_CACHE = 9,
  KLOOSTER_STATUS_IO = 10,
  KLOOSTER_STATUS_PANIC = 11,
} KloosterStatus;

/**
 * Opaque table of τ(n) and λ(n) = τ(n) n^{-11/2} for 1 ≤ n ≤ n_max.
 */
typedef struct KloosterTauTable KloosterTauTable;

typedef struct KloosterComplex {
  double re;
  double im;
} KloosterComplex;

/**
 * Both sides of a summation identity.
 */
typedef struct KloosterIdentityReport {
  struct KloosterComplex lhs;
  struct KloosterComplex rhs;
  double residual;
  double relative_residual;
  uint64_t dual_terms;
} KloosterIdentityReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
 * Returns the full message length without the NUL, or 0 when there is none.
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
size_t klooster_last_error_message(char *buf, size_t len);

/**
 * Builds the table for 1 ≤ n ≤ n_max, reading and writing $KLOOSTER_CACHE_DIR when set.
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_tau_table_new(uint64_t n_max, struct KloosterTauTable **table_out);

/**
 * Releases a table; null is ignored.
 *
 * # Safety
 * `table` is null or a live handle from `klooster_tau_table_new`, freed at most once.
 */
void klooster_tau_table_free(struct KloosterTauTable *table);

/**
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_tau_table_n_max(const struct KloosterTauTable *table,
                                             uint64_t *n_max_out);

/**
 * τ(n); `Overflow` when it does not fit in 64 bits.
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_tau(const struct KloosterTauTable *table,
                                 uint64_t n,
                                 int64_t *tau_out);

/**
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_lambda(const struct KloosterTauTable *table,
                                    uint64_t n,
                                    double *lambda_out);

/**
 * S(a, b; m) = Σ_{x unit mod m} e((a x + b x̄)/m), unnormalized.
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_kloosterman(int64_t a,
                                         int64_t b,
                                         uint64_t m,
                                         struct KloosterComplex *value_out);

/**
 * Kl_k(n; q) = q^{-(k-1)/2} Σ_{x_1⋯x_k ≡ n (q)} e((x_1 + ⋯ + x_k)/q); `method` is a `KloosterMethod`.
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_hyper_kloosterman(uint32_t k,
                                               int64_t n,
                                               uint64_t q,
                                               uint32_t method,
                                               struct KloosterComplex *value_out);

/**
 * S3(m, l, a; d) = Σ_{u, v unit mod d} e((a u + l v + m ū v̄)/d).
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_s3_sum(int64_t m,
                                    int64_t l,
                                    int64_t a,
                                    uint64_t d,
                                    struct KloosterComplex *value_out);

/**
 * c_d(n) = Σ_{u unit mod d} e(u n / d).
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_ramanujan_sum(uint64_t d, int64_t n, int64_t *value_out);

/**
 * E(X; q, a) for the coefficients (λ*1)(n).
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_error_term(const struct KloosterTauTable *table,
                                        uint64_t x,
                                        uint64_t q,
                                        uint64_t a,
                                        double *value_out);

/**
 * Largest grid δ with σ_max(δ) ≤ 1 − κ and θ = 1/(2 − δ); both NaN when no δ qualifies.
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_exponent_opt(double eta,
                                          double kappa,
                                          double resolution,
                                          bool with_completion,
                                          double *delta_out,
                                          double *theta_out);

/**
 * Σ_{n≡a (q)} V(n) against q^{-1} Σ_m e(am/q) V̂(m/q), V the bump 0 off [c1,c2], 1 on [lo,hi].
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_poisson_check(uint64_t q,
                                           int64_t a,
                                           double c1,
                                           double lo,
                                           double hi,
                                           double c2,
                                           struct KloosterIdentityReport *report_out);

/**
 * Σ λ(n) e(an/q) V(n) against q^{-1} Σ λ(n) e(−ā n/q) Ṽ(n/q²).
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_voronoi_check(const struct KloosterTauTable *table,
                                           uint64_t q,
                                           int64_t a,
                                           double c1,
                                           double lo,
                                           double hi,
                                           double c2,
                                           struct KloosterIdentityReport *report_out);

/**
 * Σ_{ml≡a (q)} λ(m)V(m)W(l) against its dual expansion; each window is four doubles c1,lo,hi,c2.
 *
 * # Safety
 * Pointer arguments are null or valid for the reads and writes their types describe.
 */
enum KloosterStatus klooster_congruence_sum_check(const struct KloosterTauTable *table,
                                                  uint64_t q,
                                                  int64_t a,
                                                  const double *v_window,
                                                  const double *w_window,
                                                  struct KloosterIdentityReport *report_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KLOOSTER_H */
