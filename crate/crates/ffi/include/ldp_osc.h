#ifndef LDP_OSC_H
#define LDP_OSC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LdpStatus {
  LDP_STATUS_OK = 0,
  LDP_STATUS_NULL_POINTER = 1,
  LDP_STATUS_INVALID_UTF8 = 2,
  LDP_STATUS_DOMAIN = 3,
  LDP_STATUS_OUT_OF_RANGE = 4,
  LDP_STATUS_INVALID_METHOD = 5,
  LDP_STATUS_UNKNOWN_METHOD = 6,
  LDP_STATUS_PARSE = 7,
  LDP_STATUS_INAPPLICABLE = 8,
  LDP_STATUS_SPECTRAL = 9,
  LDP_STATUS_INVARIANT = 10,
  LDP_STATUS_IO = 11,
  LDP_STATUS_INVALID_ARGUMENT = 12,
  LDP_STATUS_PANIC = 13,
} LdpStatus;

typedef enum LdpRegime {
  LDP_REGIME_NONE = 0,
  LDP_REGIME_SYMPLECTIC = 1,
  LDP_REGIME_NON_SYMPLECTIC = 2,
} LdpRegime;

typedef enum LdpObservable {
  LDP_OBSERVABLE_MEAN_POSITION = 0,
  LDP_OBSERVABLE_MEAN_VELOCITY = 1,
} LdpObservable;

// Which finite-N law `ldp_law` returns.
typedef enum LdpStatistic {
  // `N A_N`, the sum of the first N positions.
  LDP_STATISTIC_SUM_POSITION = 0,
  // `x_N`.
  LDP_STATISTIC_TERMINAL_POSITION = 1,
  // `A_N`.
  LDP_STATISTIC_MEAN_POSITION = 2,
  // `B_N = x_N / (N h)`.
  LDP_STATISTIC_MEAN_VELOCITY = 3,
} LdpStatistic;

// Opaque method handle.
typedef struct LdpMethod LdpMethod;

typedef struct LdpCoefficients {
  double a11;
  double a12;
  double a21;
  double a22;
  double b1;
  double b2;
} LdpCoefficients;

typedef struct LdpConditions {
  bool a1;
  bool a2;
  bool a3;
  bool a4;
  bool symplectic;
  bool excluded;
  double det;
  double trace;
  double total_weight;
} LdpConditions;

typedef struct LdpParams {
  double alpha;
  double x0;
  double y0;
} LdpParams;

// Rate functions are `c y^2`; a degenerate rate has `degenerate = true`
// and coefficients of `+inf`.
typedef struct LdpRate {
  bool applicable;
  enum LdpRegime regime;
  bool degenerate;
  double coefficient;
  double modified_coefficient;
  double log_mgf_coefficient;
} LdpRate;

typedef struct LdpLaw {
  double mean;
  double variance;
} LdpLaw;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *ldp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ldp_version(void);

// Looks up a built-in method (`midpoint`, `beta:0.3`, `ex`, `M4`, ...) or
// `file:<path>`.
//
// # Safety
// `selector` must be a NUL-terminated string; `out` must be writable.
enum LdpStatus ldp_method_from_selector(const char *selector, struct LdpMethod **out);

// Parses the text of a method-definition file.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum LdpStatus ldp_method_from_text(const char *text, struct LdpMethod **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `m` must come from an `ldp_method_from_*` call and not be used afterwards.
void ldp_method_free(struct LdpMethod *m);

// Name of the method; owned by the handle.
//
// # Safety
// `m` must be a live handle or null.
const char *ldp_method_name(const struct LdpMethod *m);

// `(A, b)` at step `h`, checked against the admissible range.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum LdpStatus ldp_method_coefficients(const struct LdpMethod *m,
                                       double h,
                                       struct LdpCoefficients *out);

// Assumption flags at step `h`.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum LdpStatus ldp_conditions(const struct LdpMethod *m, double h, struct LdpConditions *out);

// Rate function of `observable` (an `LdpObservable` value) at step `h`.
// An inapplicable configuration is not an error: `applicable` is false and
// the message is available from `ldp_last_error_message`.
//
// # Safety
// `m` and `p` must be valid; `out` must be writable.
enum LdpStatus ldp_rate(const struct LdpMethod *m,
                        double h,
                        int32_t observable_id,
                        const struct LdpParams *p,
                        struct LdpRate *out);

// Exact Gaussian law of a finite-N statistic (an `LdpStatistic` value).
//
// # Safety
// `m` and `p` must be valid; `out` must be writable.
enum LdpStatus ldp_law(const struct LdpMethod *m,
                       double h,
                       uint64_t n,
                       int32_t statistic,
                       const struct LdpParams *p,
                       struct LdpLaw *out);

// `ln P(lo <= X <= hi)` for `X ~ N(mean, variance)`; endpoints may be
// infinite. Accurate far into the tails.
//
// # Safety
// `out` must be writable.
enum LdpStatus ldp_interval_log_probability(double mean,
                                            double variance,
                                            double lo,
                                            double hi,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LDP_OSC_H */
