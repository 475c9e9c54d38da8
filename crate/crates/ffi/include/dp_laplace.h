#ifndef DP_LAPLACE_H
#define DP_LAPLACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DplStatus {
  DPL_STATUS_OK = 0,
  DPL_STATUS_NULL_POINTER = 1,
  DPL_STATUS_INVALID_PARAMETER = 2,
  DPL_STATUS_EMPTY_ROC = 3,
  DPL_STATUS_DIVERGENCE = 4,
  DPL_STATUS_NON_CONVERGENCE = 5,
  DPL_STATUS_RESOURCE_LIMIT = 6,
  DPL_STATUS_NO_CROSSING = 7,
  DPL_STATUS_METHOD_INAPPLICABLE = 8,
  DPL_STATUS_PANIC = 9,
} DplStatus;

/**
 * Opaque privacy profile.
 */
typedef struct DplProfile DplProfile;

/**
 * Opaque Rényi curve.
 */
typedef struct DplRenyiCurve DplRenyiCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *dpl_last_error_message(void);

/**
 * Gaussian mechanism with κ = Δ²/(2σ²).
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum DplStatus dpl_profile_gaussian(double kappa, struct DplProfile **out);

/**
 * Randomized response with parameters (ε₀, δ₀).
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum DplStatus dpl_profile_randomized_response(double eps0, double delta0, struct DplProfile **out);

/**
 * Poisson subsampling at rate `lambda` (remove direction).
 *
 * # Safety
 * `prof` must be a live handle from this library.
 */
enum DplStatus dpl_profile_subsample(const struct DplProfile *prof,
                                     double lambda,
                                     struct DplProfile **out);

/**
 * Profile of the swapped pair.
 *
 * # Safety
 * `prof` must be a live handle from this library.
 */
enum DplStatus dpl_profile_reverse(const struct DplProfile *prof, struct DplProfile **out);

/**
 * δ(ε).
 *
 * # Safety
 * `prof` must be a live handle from this library.
 */
enum DplStatus dpl_profile_eval(const struct DplProfile *prof, double eps, double *out);

/**
 * Smallest ε in [lo, hi] with δ(ε) ≤ `budget`; `DPL_STATUS_NO_CROSSING` if δ(hi) is still above it.
 *
 * # Safety
 * `prof` must be a live handle from this library.
 */
enum DplStatus dpl_profile_eps_for_delta(const struct DplProfile *prof,
                                         double budget,
                                         double lo,
                                         double hi,
                                         double *out);

/**
 * Releases a profile handle. NULL is ignored.
 *
 * # Safety
 * `prof` must come from this library and not be used afterwards.
 */
void dpl_profile_free(struct DplProfile *prof);

/**
 * Composed profile of `n` point guarantees at ε = `t`.
 *
 * # Safety
 * `eps0` and `delta0` must point to `n` readable doubles.
 */
enum DplStatus dpl_compose_point_guarantees(const double *eps0,
                                            const double *delta0,
                                            uintptr_t n,
                                            double t,
                                            double *out);

/**
 * `k`-fold composition of one (ε₀, δ₀) guarantee at ε = `t`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum DplStatus dpl_compose_homogeneous(double eps0,
                                       double delta0,
                                       uint32_t k,
                                       double t,
                                       double *out);

/**
 * Rényi curve of a profile via the forward transform.
 *
 * # Safety
 * `prof` must be a live handle from this library.
 */
enum DplStatus dpl_renyi_from_profile(const struct DplProfile *prof, struct DplRenyiCurve **out);

/**
 * Closed-form Gaussian Rényi curve.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum DplStatus dpl_renyi_gaussian(double kappa, struct DplRenyiCurve **out);

/**
 * Closed-form Rényi curve of randomized response with δ₀ = 0.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum DplStatus dpl_renyi_rr(double eps0, struct DplRenyiCurve **out);

/**
 * ρ(q) at a complex order; the real and imaginary parts go to `out_re`, `out_im`.
 *
 * # Safety
 * `curve` must be a live handle from this library.
 */
enum DplStatus dpl_renyi_eval(const struct DplRenyiCurve *curve,
                              double q_re,
                              double q_im,
                              double *out_re,
                              double *out_im);

/**
 * δ(ε) recovered from a Rényi curve along Re(s) = `gamma`.
 *
 * # Safety
 * `curve` must be a live handle from this library.
 */
enum DplStatus dpl_renyi_to_profile(const struct DplRenyiCurve *curve,
                                    double eps,
                                    double gamma,
                                    double *out);

/**
 * Releases a curve handle. NULL is ignored.
 *
 * # Safety
 * `curve` must come from this library and not be used afterwards.
 */
void dpl_renyi_free(struct DplRenyiCurve *curve);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DP_LAPLACE_H */
