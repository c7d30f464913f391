#ifndef QCP_H
#define QCP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum QcpStatus {
  QCP_STATUS_OK = 0,
  QCP_STATUS_NULL_POINTER = 1,
  QCP_STATUS_INVALID_ARGUMENT = 2,
  // A certificate check failed; the handle is still produced.
  QCP_STATUS_VERIFICATION = 3,
  QCP_STATUS_INTERNAL = 4,
} QcpStatus;

// Certification report handle.
typedef struct QcpCertificate QcpCertificate;

// Tradeoff curve handle.
typedef struct QcpCurve QcpCurve;

// Complex number as two doubles.
typedef struct QcpComplex {
  double re;
  double im;
} QcpComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the length needed including the NUL, or 0
// when there is no error.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t qcp_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *qcp_version(void);

// Curve of a unitary pair at polygon distance `t ∈ (0, 1)`.
//
// # Safety
// `out` must be valid for writes.
enum QcpStatus qcp_curve_unitary(double t, struct QcpCurve **out);

// Curve of a pure-state pair with overlap `s ∈ (0, 1)`.
//
// # Safety
// `out` must be valid for writes.
enum QcpStatus qcp_curve_pure_state(double s, struct QcpCurve **out);

// Piecewise-linear curve through `(p[i], f[i])`, `i < len`.
//
// # Safety
// `p` and `f` must be valid for `len` reads; `out` for writes.
enum QcpStatus qcp_curve_tabulated(const double *p,
                                   const double *f,
                                   size_t len,
                                   double p_bar,
                                   bool invert,
                                   struct QcpCurve **out);

// # Safety
// `curve` must be null or a handle from a `qcp_curve_*` constructor, freed once.
void qcp_curve_free(struct QcpCurve *curve);

// `f(p)` for `p ∈ [0, p̄]`.
//
// # Safety
// `curve` must be a live handle; `out` valid for writes.
enum QcpStatus qcp_curve_eval(const struct QcpCurve *curve, double p, double *out);

// Largest feasible `p`.
//
// # Safety
// `curve` must be a live handle; `out` valid for writes.
enum QcpStatus qcp_curve_p_bar(const struct QcpCurve *curve, double *out);

// `uP(N)` and its largest maximizer; `argmax` may be null.
//
// # Safety
// `curve` must be a live handle; `upper` valid for writes, `argmax` null or valid.
enum QcpStatus qcp_upper_bound(const struct QcpCurve *curve,
                               size_t n,
                               size_t resolution,
                               double *upper,
                               double *argmax);

// Adaptive lower bound `lP(N)`.
//
// # Safety
// `curve` must be a live handle; `out` valid for writes.
enum QcpStatus qcp_lower_bound(const struct QcpCurve *curve, size_t n, double *out);

// Brute-force grid value of the upper bound.
//
// # Safety
// `curve` must be a live handle; `out` valid for writes.
enum QcpStatus qcp_dp_oracle(const struct QcpCurve *curve, size_t n, size_t grid, double *out);

// Exact optimum for a unitary pair at polygon distance `t ∈ [0, 1]`.
//
// # Safety
// `out` must be valid for writes.
enum QcpStatus qcp_upper_bound_unitary(double t, size_t n, double *out);

// Polygon distance `t` of `U₀†U₁` and the phase `u` (zero when `t = 0`).
// Matrices are row-major `dim × dim`; `u` may be null.
//
// # Safety
// `u0`, `u1` must be valid for `dim²` reads; `t` valid for writes, `u` null or valid.
enum QcpStatus qcp_analyze_unitary_pair(const struct QcpComplex *u0,
                                        const struct QcpComplex *u1,
                                        size_t dim,
                                        double *t,
                                        struct QcpComplex *u);

// Build and verify the optimal tester for `N` uses of `(U₀, U₁)`.
// `d_prime = 0` selects the default ancilla dimension `N + 2`.
//
// Returns `Verification` when a check fails; the handle is still written
// so the report can be inspected.
//
// # Safety
// `u0`, `u1` must be valid for `dim²` reads; `out` valid for writes.
enum QcpStatus qcp_certify(const struct QcpComplex *u0,
                           const struct QcpComplex *u1,
                           size_t dim,
                           size_t n,
                           size_t d_prime,
                           struct QcpCertificate **out);

// # Safety
// `cert` must be null or a handle from [`qcp_certify`], freed once.
void qcp_certificate_free(struct QcpCertificate *cert);

// Whether every check passed.
//
// # Safety
// `cert` must be a live handle; `out` valid for writes.
enum QcpStatus qcp_certificate_passed(const struct QcpCertificate *cert, bool *out);

// Measured average success of the tester.
//
// # Safety
// `cert` must be a live handle; `out` valid for writes.
enum QcpStatus qcp_certificate_average(const struct QcpCertificate *cert, double *out);

// Copy `P(k|k)` for `k = 0…N` into `buf`; `written` receives `N + 1`.
//
// # Safety
// `cert` must be a live handle; `buf` valid for `len` writes; `written` valid.
enum QcpStatus qcp_certificate_success(const struct QcpCertificate *cert,
                                       double *buf,
                                       size_t len,
                                       size_t *written);

// Full report as JSON; release with [`qcp_string_free`].
//
// # Safety
// `cert` must be a live handle; `out` valid for writes.
enum QcpStatus qcp_certificate_report_json(const struct QcpCertificate *cert, char **out);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void qcp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCP_H */
