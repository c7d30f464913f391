//! C ABI for the bounds, exact values and tester certificates.
//!
//! Every fallible function returns a [`QcpStatus`]; on failure the message is
//! kept per thread and read with [`qcp_last_error_message`]. Objects are
//! opaque handles released by their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcp::adaptive::optimize_schedule;
use qcp::bounds::{dp_oracle, upper_bound, upper_bound_unitary};
use qcp::certificate::{certify, CertificationReport};
use qcp::fmap::{analyze_unitary_pair, TradeoffCurve};
use qcp::numerics::{ComplexMatrix, C64};
use qcp::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A certificate check failed; the handle is still produced.
    Verification = 3,
    Internal = 4,
}

/// Complex number as two doubles.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QcpComplex {
    pub re: f64,
    pub im: f64,
}

/// Tradeoff curve handle.
pub struct QcpCurve(TradeoffCurve);

/// Certification report handle.
pub struct QcpCertificate(CertificationReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: QcpStatus, msg: impl Into<String>) -> QcpStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> QcpStatus {
    let status = match e {
        Error::Validation(_) | Error::Config(_) => QcpStatus::InvalidArgument,
        Error::Verification { .. } => QcpStatus::Verification,
        Error::Consistency(_) | Error::Io(_) => QcpStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Run `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> QcpStatus) -> QcpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(QcpStatus::Internal, "panic inside qcp"),
    }
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $( if $p.is_null() {
            return fail(QcpStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        } )+
    };
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e),
        }
    };
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the length needed including the NUL, or 0
/// when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn qcp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn put_curve(curve: qcp::Result<TradeoffCurve>, out: *mut *mut QcpCurve) -> QcpStatus {
    let curve = tri!(curve);
    *out = Box::into_raw(Box::new(QcpCurve(curve)));
    QcpStatus::Ok
}

/// Curve of a unitary pair at polygon distance `t ∈ (0, 1)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_curve_unitary(t: f64, out: *mut *mut QcpCurve) -> QcpStatus {
    nonnull!(out);
    guard(|| put_curve(TradeoffCurve::unitary(t), out))
}

/// Curve of a pure-state pair with overlap `s ∈ (0, 1)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_curve_pure_state(s: f64, out: *mut *mut QcpCurve) -> QcpStatus {
    nonnull!(out);
    guard(|| put_curve(TradeoffCurve::pure_state(s), out))
}

/// Piecewise-linear curve through `(p[i], f[i])`, `i < len`.
///
/// # Safety
/// `p` and `f` must be valid for `len` reads; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_curve_tabulated(
    p: *const f64,
    f: *const f64,
    len: usize,
    p_bar: f64,
    invert: bool,
    out: *mut *mut QcpCurve,
) -> QcpStatus {
    nonnull!(p, f, out);
    guard(|| {
        let p = std::slice::from_raw_parts(p, len);
        let f = std::slice::from_raw_parts(f, len);
        let knots: Vec<(f64, f64)> = p.iter().copied().zip(f.iter().copied()).collect();
        put_curve(TradeoffCurve::tabulated(&knots, p_bar, invert), out)
    })
}

/// # Safety
/// `curve` must be null or a handle from a `qcp_curve_*` constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn qcp_curve_free(curve: *mut QcpCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// `f(p)` for `p ∈ [0, p̄]`.
///
/// # Safety
/// `curve` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_curve_eval(curve: *const QcpCurve, p: f64, out: *mut f64) -> QcpStatus {
    nonnull!(curve, out);
    guard(|| {
        *out = tri!((*curve).0.eval(p));
        QcpStatus::Ok
    })
}

/// Largest feasible `p`.
///
/// # Safety
/// `curve` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_curve_p_bar(curve: *const QcpCurve, out: *mut f64) -> QcpStatus {
    nonnull!(curve, out);
    *out = (*curve).0.p_bar();
    QcpStatus::Ok
}

/// `uP(N)` and its largest maximizer; `argmax` may be null.
///
/// # Safety
/// `curve` must be a live handle; `upper` valid for writes, `argmax` null or valid.
#[no_mangle]
pub unsafe extern "C" fn qcp_upper_bound(
    curve: *const QcpCurve,
    n: usize,
    resolution: usize,
    upper: *mut f64,
    argmax: *mut f64,
) -> QcpStatus {
    nonnull!(curve, upper);
    guard(|| {
        let b = tri!(upper_bound(&(*curve).0, n, resolution));
        *upper = b.upper;
        if !argmax.is_null() {
            *argmax = b.upper_argmax;
        }
        QcpStatus::Ok
    })
}

/// Adaptive lower bound `lP(N)`.
///
/// # Safety
/// `curve` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_lower_bound(curve: *const QcpCurve, n: usize, out: *mut f64) -> QcpStatus {
    nonnull!(curve, out);
    guard(|| {
        *out = tri!(optimize_schedule(&(*curve).0, n)).lower_bound;
        QcpStatus::Ok
    })
}

/// Brute-force grid value of the upper bound.
///
/// # Safety
/// `curve` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_dp_oracle(
    curve: *const QcpCurve,
    n: usize,
    grid: usize,
    out: *mut f64,
) -> QcpStatus {
    nonnull!(curve, out);
    guard(|| {
        *out = tri!(dp_oracle(&(*curve).0, n, grid));
        QcpStatus::Ok
    })
}

/// Exact optimum for a unitary pair at polygon distance `t ∈ [0, 1]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_upper_bound_unitary(t: f64, n: usize, out: *mut f64) -> QcpStatus {
    nonnull!(out);
    guard(|| {
        *out = tri!(upper_bound_unitary(t, n));
        QcpStatus::Ok
    })
}

unsafe fn read_matrix(m: *const QcpComplex, dim: usize) -> qcp::Result<ComplexMatrix> {
    let data = std::slice::from_raw_parts(m, dim * dim)
        .iter()
        .map(|z| C64::new(z.re, z.im))
        .collect();
    ComplexMatrix::from_row_major(dim, dim, data)
}

/// Polygon distance `t` of `U₀†U₁` and the phase `u` (zero when `t = 0`).
/// Matrices are row-major `dim × dim`; `u` may be null.
///
/// # Safety
/// `u0`, `u1` must be valid for `dim²` reads; `t` valid for writes, `u` null or valid.
#[no_mangle]
pub unsafe extern "C" fn qcp_analyze_unitary_pair(
    u0: *const QcpComplex,
    u1: *const QcpComplex,
    dim: usize,
    t: *mut f64,
    u: *mut QcpComplex,
) -> QcpStatus {
    nonnull!(u0, u1, t);
    guard(|| {
        let a = tri!(read_matrix(u0, dim));
        let b = tri!(read_matrix(u1, dim));
        let pair = tri!(analyze_unitary_pair(&a, &b));
        *t = pair.t;
        if !u.is_null() {
            let z = pair.u.unwrap_or_default();
            *u = QcpComplex { re: z.re, im: z.im };
        }
        QcpStatus::Ok
    })
}

/// Build and verify the optimal tester for `N` uses of `(U₀, U₁)`.
/// `d_prime = 0` selects the default ancilla dimension `N + 2`.
///
/// Returns `Verification` when a check fails; the handle is still written
/// so the report can be inspected.
///
/// # Safety
/// `u0`, `u1` must be valid for `dim²` reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_certify(
    u0: *const QcpComplex,
    u1: *const QcpComplex,
    dim: usize,
    n: usize,
    d_prime: usize,
    out: *mut *mut QcpCertificate,
) -> QcpStatus {
    nonnull!(u0, u1, out);
    guard(|| {
        let a = tri!(read_matrix(u0, dim));
        let b = tri!(read_matrix(u1, dim));
        let report = tri!(certify(&a, &b, n, (d_prime > 0).then_some(d_prime)));
        let status = if report.passed {
            QcpStatus::Ok
        } else {
            let first = report
                .error
                .clone()
                .or_else(|| report.checks.iter().find(|c| !c.passed).map(|c| c.name.clone()))
                .unwrap_or_default();
            fail(QcpStatus::Verification, format!("certification failed: {first}"))
        };
        *out = Box::into_raw(Box::new(QcpCertificate(report)));
        status
    })
}

/// # Safety
/// `cert` must be null or a handle from [`qcp_certify`], freed once.
#[no_mangle]
pub unsafe extern "C" fn qcp_certificate_free(cert: *mut QcpCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Whether every check passed.
///
/// # Safety
/// `cert` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_certificate_passed(cert: *const QcpCertificate, out: *mut bool) -> QcpStatus {
    nonnull!(cert, out);
    *out = (*cert).0.passed;
    QcpStatus::Ok
}

/// Measured average success of the tester.
///
/// # Safety
/// `cert` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_certificate_average(cert: *const QcpCertificate, out: *mut f64) -> QcpStatus {
    nonnull!(cert, out);
    match &(*cert).0.evaluation {
        Some(e) => {
            *out = e.average;
            QcpStatus::Ok
        }
        None => fail(QcpStatus::Verification, "tester was not built"),
    }
}

/// Copy `P(k|k)` for `k = 0…N` into `buf`; `written` receives `N + 1`.
///
/// # Safety
/// `cert` must be a live handle; `buf` valid for `len` writes; `written` valid.
#[no_mangle]
pub unsafe extern "C" fn qcp_certificate_success(
    cert: *const QcpCertificate,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> QcpStatus {
    nonnull!(cert, buf, written);
    let Some(e) = &(*cert).0.evaluation else {
        return fail(QcpStatus::Verification, "tester was not built");
    };
    *written = e.success.len();
    if len < e.success.len() {
        return fail(
            QcpStatus::InvalidArgument,
            format!("buffer holds {len}, need {}", e.success.len()),
        );
    }
    ptr::copy_nonoverlapping(e.success.as_ptr(), buf, e.success.len());
    QcpStatus::Ok
}

/// Full report as JSON; release with [`qcp_string_free`].
///
/// # Safety
/// `cert` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcp_certificate_report_json(
    cert: *const QcpCertificate,
    out: *mut *mut c_char,
) -> QcpStatus {
    nonnull!(cert, out);
    guard(|| {
        let json = match serde_json::to_string(&(*cert).0) {
            Ok(s) => s,
            Err(e) => return fail(QcpStatus::Internal, e.to_string()),
        };
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        QcpStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qcp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
