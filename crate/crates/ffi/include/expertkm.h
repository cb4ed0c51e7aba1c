#ifndef EXPERTKM_H
#define EXPERTKM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every fallible function.
typedef enum EkmStatus {
  EKM_STATUS_OK = 0,
  EKM_STATUS_NULL_POINTER = 1,
  EKM_STATUS_INVALID_INPUT = 2,
  EKM_STATUS_MISSING_EXPERT_INFO = 3,
  EKM_STATUS_DEGENERATE_WEIGHT = 4,
  EKM_STATUS_DEGENERATE_FIT = 5,
  EKM_STATUS_NUMERIC = 6,
  EKM_STATUS_PANIC = 7,
} EkmStatus;

typedef enum EkmKernelKind {
  // No kernel (open claims).
  EKM_KERNEL_KIND_NONE = 0,
  EKM_KERNEL_KIND_DIRAC = 1,
  EKM_KERNEL_KIND_TRUNCATED_GAUSSIAN = 2,
  EKM_KERNEL_KIND_TRUNCATED_GAMMA = 3,
  EKM_KERNEL_KIND_UNIFORM = 4,
} EkmKernelKind;

typedef enum EkmEstimator {
  // Usual Kaplan–Meier estimator on the closed/open indicators.
  EKM_ESTIMATOR_KM = 0,
  // Crude expert estimator on the judgments.
  EKM_ESTIMATOR_CRUDE = 1,
  // Kernel-mixture estimator on the belief kernels.
  EKM_ESTIMATOR_SOPHISTICATED = 2,
  // Benchmark using the hidden event times.
  EKM_ESTIMATOR_ORACLE = 3,
} EkmEstimator;

typedef enum EkmModel {
  EKM_MODEL_EXPONENTIAL = 0,
  // `param` is the known scale.
  EKM_MODEL_PARETO = 1,
  // `param` is the number of upper order statistics.
  EKM_MODEL_HILL = 2,
} EkmModel;

typedef enum EkmMode {
  EKM_MODE_CRUDE = 0,
  EKM_MODE_SOPHISTICATED = 1,
} EkmMode;

// Opaque curve handle.
typedef struct EkmCurve EkmCurve;

// Opaque sample handle.
typedef struct EkmSample EkmSample;

typedef struct EkmFit {
  double estimate;
  double weight_mass;
  double residual;
  // 0 for a closed form, 1 for the numeric maximiser.
  int32_t numeric;
} EkmFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a sample from `n` observations. `delta[i]` is nonzero for a
// closed claim. `eta` (judgments) and `x_true` (hidden event times) may be
// null.
//
// # Safety
// `w` and `delta` must point to `n` values; `eta` and `x_true` must be
// null or point to `n` values; `out` must be a valid pointer.
enum EkmStatus ekm_sample_new(const double *w,
                              const uint8_t *delta,
                              const double *eta,
                              const double *x_true,
                              size_t n,
                              struct EkmSample **out);

// Attaches belief kernels, one per observation in input order. Each
// kernel lives on `[w_i, ∞)`; `p1`/`p2` follow the kernel CSV convention
// (Dirac atom; Gaussian location/scale; Gamma shape/rate; uniform upper
// end). Open claims take [`EkmKernelKind::None`].
//
// # Safety
// `sample` must be a live handle; the arrays must hold `n` values.
enum EkmStatus ekm_sample_set_kernels(struct EkmSample *sample,
                                      const enum EkmKernelKind *kinds,
                                      const double *p1,
                                      const double *p2,
                                      size_t n);

// # Safety
// `sample` must be null or a handle from [`ekm_sample_new`] not yet freed.
void ekm_sample_free(struct EkmSample *sample);

// Number of observations in a sample; 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle.
size_t ekm_sample_len(const struct EkmSample *sample);

// Computes an estimator of the event-time distribution function.
//
// # Safety
// `sample` must be a live handle and `out` a valid pointer.
enum EkmStatus ekm_estimate(const struct EkmSample *sample,
                            enum EkmEstimator estimator,
                            struct EkmCurve **out);

// Evaluates a curve at `m` points.
//
// # Safety
// `curve` must be a live handle; `t` and `values` must hold `m` values.
enum EkmStatus ekm_curve_eval(const struct EkmCurve *curve,
                              const double *t,
                              size_t m,
                              double *values);

// # Safety
// `curve` must be null or a handle from [`ekm_estimate`] not yet freed.
void ekm_curve_free(struct EkmCurve *curve);

// Fits a parametric model by weighted likelihood. `param` is the Pareto
// scale or the Hill `k` and is ignored for the Exponential model. A
// nonzero `numeric` selects the numeric maximiser.
//
// # Safety
// `sample` must be a live handle and `out` a valid pointer.
enum EkmStatus ekm_fit(const struct EkmSample *sample,
                       enum EkmModel model,
                       double param,
                       enum EkmMode mode,
                       int32_t numeric,
                       struct EkmFit *out);

// Upper incomplete gamma function `∫_x^∞ t^{s-1} e^{-t} dt`.
//
// # Safety
// `out` must be a valid pointer.
enum EkmStatus ekm_upper_incomplete_gamma(double s, double x, double *out);

// Message for the last failure on this thread; empty after a success.
// The pointer stays valid until the next call on this thread.
const char *ekm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ekm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPERTKM_H */
