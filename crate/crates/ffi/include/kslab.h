#ifndef KSLAB_H
#define KSLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Zero is success.
 */
typedef enum KsStatus {
  KS_STATUS_OK = 0,
  KS_STATUS_NULL_POINTER = 1,
  KS_STATUS_INVALID_PARAMETER = 2,
  KS_STATUS_NOT_STABLE = 3,
  KS_STATUS_NOT_REGULAR = 4,
  KS_STATUS_DEGENERATE = 5,
  KS_STATUS_NEAR_POLE = 6,
  KS_STATUS_NEAR_EIGENVALUE = 7,
  KS_STATUS_CONTOUR_ERROR = 8,
  KS_STATUS_INSUFFICIENT = 9,
  KS_STATUS_BRANCH_ERROR = 10,
  KS_STATUS_OUT_OF_RANGE = 11,
  KS_STATUS_INTERNAL = 12,
} KsStatus;

/**
 * Truncated grand partition polynomial.
 */
typedef struct KsPolynomial KsPolynomial;

/**
 * Spectrum and Laurent data of the companion KS matrix.
 */
typedef struct KsSpectral KsSpectral;

/**
 * Zeros of a partition polynomial with the simplicity certificate.
 */
typedef struct KsZeroSet KsZeroSet;

/**
 * Summary numbers of a spectral analysis.
 */
typedef struct KsSpectralSummary {
  double lambda_c_re;
  double lambda_c_im;
  double spectral_radius;
  /**
   * |lambda_2| / |lambda_c|.
   */
  double margin;
  size_t pole_order;
  size_t rank_p;
  /**
   * ||D|| / ||K||.
   */
  double nilpotent_ratio;
  /**
   * ||P^2 - P|| / ||P||.
   */
  double idempotency;
  size_t nodes;
} KsSpectralSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ks_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
 * Returns the full message length without the terminator, or 0 when there is none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ks_last_error_message(char *buf, size_t len);

/**
 * Polynomial 1 + c_1 z + ... + c_M z^M from `coeffs[0..n]`; `coeffs[0]` must be 1.
 *
 * # Safety
 * `coeffs` must point to `n` doubles and `out` to a writable handle slot.
 */
enum KsStatus ks_polynomial_from_coeffs(const double *coeffs, size_t n, struct KsPolynomial **out);

/**
 * Partition polynomial of hard rods of length `a` on [0, L], truncated at `m`.
 *
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum KsStatus ks_polynomial_hard_rods(double a, double l, size_t m, struct KsPolynomial **out);

/**
 * Degree M of the polynomial.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t ks_polynomial_degree(const struct KsPolynomial *p);

/**
 * Coefficient c_m in double precision.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum KsStatus ks_polynomial_coefficient(const struct KsPolynomial *p, size_t m, double *out);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void ks_polynomial_free(struct KsPolynomial *p);

/**
 * All zeros of `p`, polished, with the certificate of the smallest.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum KsStatus ks_zeros(const struct KsPolynomial *p, struct KsZeroSet **out);

/**
 * # Safety
 * `z` must be a live handle or null.
 */
size_t ks_zeroset_len(const struct KsZeroSet *z);

/**
 * Zero `i` and its relative residual.
 *
 * # Safety
 * `z` must be a live handle; out-pointers writable or null.
 */
enum KsStatus ks_zeroset_get(const struct KsZeroSet *z,
                             size_t i,
                             double *re,
                             double *im,
                             double *residual);

/**
 * Smallest zero z_c with its certificate: scaled |Xi'(z_c)|, minimal gap and the pass flag.
 *
 * # Safety
 * `z` must be a live handle; out-pointers writable or null.
 */
enum KsStatus ks_zeroset_smallest(const struct KsZeroSet *z,
                                  double *re,
                                  double *im,
                                  double *scaled_derivative,
                                  double *min_gap,
                                  int32_t *simple);

/**
 * # Safety
 * `z` must be null or a handle not yet freed.
 */
void ks_zeroset_free(struct KsZeroSet *z);

/**
 * Spectrum, Riesz projection and pole order of the companion KS matrix of `p`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum KsStatus ks_spectral_analyze(const struct KsPolynomial *p, struct KsSpectral **out);

/**
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum KsStatus ks_spectral_summary(const struct KsSpectral *s, struct KsSpectralSummary *out);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void ks_spectral_free(struct KsSpectral *s);

/**
 * Hard-rod pressure beta p at activity z.
 *
 * # Safety
 * `out` must be writable.
 */
enum KsStatus ks_tonks_pressure(double a, double z, double *out);

/**
 * Hard-rod density rho_1 at activity z.
 *
 * # Safety
 * `out` must be writable.
 */
enum KsStatus ks_tonks_density(double a, double z, double *out);

/**
 * Density-series coefficients 0..n of hard rods into `out[0..=n]`.
 *
 * # Safety
 * `out` must point to `n + 1` writable doubles.
 */
enum KsStatus ks_tonks_density_coefficients(double a, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSLAB_H */
