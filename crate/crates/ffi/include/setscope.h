#ifndef SETSCOPE_H
#define SETSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SetscopeStatus {
  SETSCOPE_STATUS_OK = 0,
  SETSCOPE_STATUS_NULL_POINTER = 1,
  SETSCOPE_STATUS_INVALID_PARAMETER = 2,
  SETSCOPE_STATUS_CAPACITY = 3,
  SETSCOPE_STATUS_NUMERICAL_FAILURE = 4,
  SETSCOPE_STATUS_UNAVAILABLE = 5,
  SETSCOPE_STATUS_INSUFFICIENT_SAMPLES = 6,
  SETSCOPE_STATUS_BUFFER_TOO_SMALL = 7,
  SETSCOPE_STATUS_PANIC = 8,
} SetscopeStatus;

/**
 * A fractionalization verdict.
 */
typedef enum SetscopeVerdict {
  SETSCOPE_VERDICT_UNDETERMINED = 0,
  SETSCOPE_VERDICT_PLUS = 1,
  SETSCOPE_VERDICT_MINUS = -1,
} SetscopeVerdict;

/**
 * Model parameters: signs, `w` and the detected sector.
 */
typedef struct SetscopeModel SetscopeModel;

/**
 * Spectrum, ground set, SCL minima and gaps at one perimeter.
 */
typedef struct SetscopeSpectrum SetscopeSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *setscope_version(void);

/**
 * Message of the last failing call on this thread; empty if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *setscope_last_error(void);

/**
 * Create a model. `km`, `ke` are ±1, `w` in (0, 1], `detect` 0 for e, 1 for m.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum SetscopeStatus setscope_model_new(int32_t km,
                                       int32_t ke,
                                       double w,
                                       int32_t detect,
                                       struct SetscopeModel **out);

/**
 * Release a model. Null is ignored.
 *
 * # Safety
 * `model` must come from [`setscope_model_new`] and not be freed twice.
 */
void setscope_model_free(struct SetscopeModel *model);

/**
 * Analyse the model at perimeter `ly` with explicit tolerances.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing one pointer.
 */
enum SetscopeStatus setscope_spectrum_compute_with(const struct SetscopeModel *model,
                                                   uint32_t ly,
                                                   double degeneracy_tol,
                                                   double real_tol,
                                                   double zero_tol,
                                                   struct SetscopeSpectrum **out);

/**
 * Analyse the model at perimeter `ly` with default tolerances.
 *
 * # Safety
 * As [`setscope_spectrum_compute_with`].
 */
enum SetscopeStatus setscope_spectrum_compute(const struct SetscopeModel *model,
                                              uint32_t ly,
                                              struct SetscopeSpectrum **out);

/**
 * Release a spectrum. Null is ignored.
 *
 * # Safety
 * `spectrum` must come from a compute call and not be freed twice.
 */
void setscope_spectrum_free(struct SetscopeSpectrum *spectrum);

/**
 * Leading magnitude λ0.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` valid for writing.
 */
enum SetscopeStatus setscope_spectrum_lambda0(const struct SetscopeSpectrum *spectrum, double *out);

/**
 * Number of degenerate leading eigenvalues.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` valid for writing.
 */
enum SetscopeStatus setscope_spectrum_ground_count(const struct SetscopeSpectrum *spectrum,
                                                   size_t *out);

/**
 * SCL minimum ε at `k_index` on `branch` (0: k_x=0, 1: k_x=π); +infinity when
 * the sector has no nonvanishing eigenvalue there.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` valid for writing.
 */
enum SetscopeStatus setscope_spectrum_epsilon(const struct SetscopeSpectrum *spectrum,
                                              int32_t branch,
                                              uint32_t k_index,
                                              double *out);

/**
 * Gap γ at `k_index` on `branch`; +infinity when no eigenvalue qualifies.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` valid for writing.
 */
enum SetscopeStatus setscope_spectrum_gap(const struct SetscopeSpectrum *spectrum,
                                          int32_t branch,
                                          uint32_t k_index,
                                          double *out);

/**
 * Total number of eigenvalues over all momentum sectors (`2^{L_y}`).
 *
 * # Safety
 * `spectrum` must be a live handle and `out` valid for writing.
 */
enum SetscopeStatus setscope_spectrum_eigenvalue_count(const struct SetscopeSpectrum *spectrum,
                                                       size_t *out);

/**
 * Copy all eigenvalues, sector by sector, into `re` / `im` of length `len`.
 *
 * # Safety
 * `re` and `im` must each be valid for writing `len` doubles.
 */
enum SetscopeStatus setscope_spectrum_eigenvalues(const struct SetscopeSpectrum *spectrum,
                                                  double *re,
                                                  double *im,
                                                  size_t len);

/**
 * Verdict for the model's detected sector from curves at the `n` perimeters in `lys`.
 *
 * # Safety
 * `model` must be a live handle, `lys` valid for reading `n` values and `out` for writing.
 */
enum SetscopeStatus setscope_classify(const struct SetscopeModel *model,
                                      const uint32_t *lys,
                                      size_t n,
                                      double period_threshold,
                                      double min_fit_quality,
                                      enum SetscopeVerdict *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SETSCOPE_H */
