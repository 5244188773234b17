//! C interface to `xi_lab`.
//!
//! Every fallible function returns an [`XlStatus`]; on failure the message is
//! available from [`xl_last_error`]. Handles are opaque and must be released
//! with their matching `*_free` function. Strings returned to the caller are
//! released with [`xl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use xi_lab::matrix_model::{build_potential, hermite_q, q_polynomial, CharPolynomial};
use xi_lab::pipeline::{run_table1, CouplingSource, RunSettings, TABLE1_ROWS};
use xi_lab::potentials::{taylor_u, KernelKind, PotentialSpec};
use xi_lab::roots::{find_roots, RootSet};
use xi_lab::scaling::{cosh_couplings, double_scaling, rescale_potential, GMode, ScaledPotential};
use xi_lab::{Error, Precision, XReal};

/// Result codes. `XL_CONFIG` and `XL_NUMERIC` mirror the CLI exit codes.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XlStatus {
    XL_OK = 0,
    XL_NULL_POINTER = 1,
    XL_CONFIG = 2,
    XL_NUMERIC = 3,
    XL_INVALID_UTF8 = 4,
    XL_OUT_OF_RANGE = 5,
    XL_PANIC = 6,
}

/// A characteristic polynomial `Q_N(b)`.
pub struct XlPolynomial(CharPolynomial);

/// Roots of a polynomial with their real/complex classification.
pub struct XlRootSet(RootSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> XlStatus {
    match e.exit_code() {
        2 => XlStatus::XL_CONFIG,
        _ => XlStatus::XL_NUMERIC,
    }
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard<F: FnOnce() -> Result<(), (XlStatus, String)>>(f: F) -> XlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XlStatus::XL_OK,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            XlStatus::XL_PANIC
        }
    }
}

fn lib(e: Error) -> (XlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (XlStatus, String) {
    (XlStatus::XL_NULL_POINTER, format!("{what} is null"))
}

fn precision(digits: u32) -> Result<Precision, (XlStatus, String)> {
    Precision::new(if digits == 0 { Precision::DEFAULT_DIGITS } else { digits }).map_err(lib)
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (XlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (XlStatus::XL_INVALID_UTF8, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, (XlStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|_| (XlStatus::XL_INVALID_UTF8, "interior NUL in output".into()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn xl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Free with `xl_string_free`.
#[no_mangle]
pub extern "C" fn xl_last_error() -> *mut c_char {
    LAST_ERROR
        .with(|e| e.borrow().clone())
        .and_then(|m| CString::new(m).ok())
        .map_or(ptr::null_mut(), CString::into_raw)
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn xl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Scaled Hermite polynomial `Q_N` of the Gaussian model with coupling `g`.
/// `digits = 0` selects the default precision.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xl_polynomial_hermite(n: usize, g: f64, digits: u32, out: *mut *mut XlPolynomial) -> XlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(g > 0.0) || n == 0 {
            return Err((XlStatus::XL_CONFIG, "need N >= 1 and g > 0".into()));
        }
        let prec = precision(digits)?;
        let q = hermite_q(n, &XReal::from_f64(g, prec));
        *out = Box::into_raw(Box::new(XlPolynomial(q)));
        Ok(())
    })
}

/// `Q_N` of the `(p,1)` model for a named potential with the corrected coupling `g`.
///
/// `kind` is one of `riemann`, `ramanujan`, `eta_gamma`, `cosh`, `monomial`
/// (degree `p + 1`) or `explicit`; for `explicit`, `s[0..s_len]` holds
/// `s_1, s_2, ...` and is ignored otherwise.
///
/// # Safety
/// `kind` must be a NUL-terminated string, `s` must point to `s_len` doubles
/// (or be NULL with `s_len = 0`), and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn xl_polynomial_model(
    kind: *const c_char,
    p: usize,
    s: *const f64,
    s_len: usize,
    n: usize,
    digits: u32,
    out: *mut *mut XlPolynomial,
) -> XlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if s.is_null() && s_len > 0 {
            return Err(null("s"));
        }
        let prec = precision(digits)?;
        let kind: KernelKind = str_arg(kind, "kind")?.parse().map_err(lib)?;
        if p < 2 {
            return Err((XlStatus::XL_CONFIG, format!("p must be at least 2, got {p}")));
        }
        let sp = match kind {
            KernelKind::Explicit => {
                let vals = if s_len == 0 { &[][..] } else { std::slice::from_raw_parts(s, s_len) };
                if vals.len() > p - 1 {
                    return Err((XlStatus::XL_CONFIG, format!("at most {} couplings at p = {p}", p - 1)));
                }
                ScaledPotential::from_couplings(p, vals.iter().map(|v| XReal::from_f64(*v, prec)).collect(), prec)
            }
            KernelKind::Cosh if p % 2 == 1 => cosh_couplings(p, prec).map_err(lib)?,
            other => {
                let spec = match other {
                    KernelKind::Riemann => PotentialSpec::riemann(prec),
                    KernelKind::Ramanujan => PotentialSpec::ramanujan(prec),
                    KernelKind::EtaGamma => PotentialSpec::eta_gamma(prec),
                    KernelKind::Cosh => PotentialSpec::cosh(prec),
                    _ => PotentialSpec::monomial(p + 1, prec).map_err(lib)?,
                };
                rescale_potential(&taylor_u(&spec, p + 1).map_err(lib)?, p).map_err(lib)?
            }
        };
        let params = double_scaling(p, n, &sp.s, GMode::Corrected, prec).map_err(lib)?;
        let q = q_polynomial(&params, &build_potential(&params), n);
        *out = Box::into_raw(Box::new(XlPolynomial(q)));
        Ok(())
    })
}

/// Degree of the polynomial, or 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xl_polynomial_degree(h: *const XlPolynomial) -> usize {
    h.as_ref().map_or(0, |q| q.0.degree())
}

/// Copies the coefficients (constant term first) as doubles into `out[0..len]`;
/// `len` must be at least `degree + 1`.
///
/// # Safety
/// `h` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn xl_polynomial_coeffs(h: *const XlPolynomial, out: *mut f64, len: usize) -> XlStatus {
    guard(|| {
        let q = h.as_ref().ok_or_else(|| null("polynomial"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = q.0.coeffs();
        if len < c.len() {
            return Err((XlStatus::XL_OUT_OF_RANGE, format!("buffer holds {len}, need {}", c.len())));
        }
        let dst = std::slice::from_raw_parts_mut(out, c.len());
        for (d, v) in dst.iter_mut().zip(c) {
            *d = v.to_f64();
        }
        Ok(())
    })
}

/// Full-precision JSON `{N, precision_digits, coeffs}`. Free with `xl_string_free`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xl_polynomial_to_json(h: *const XlPolynomial, out: *mut *mut c_char) -> XlStatus {
    guard(|| {
        let q = h.as_ref().ok_or_else(|| null("polynomial"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = serde_json::to_string(&q.0).map_err(|e| lib(e.into()))?;
        *out = into_c_string(s)?;
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xl_polynomial_free(h: *mut XlPolynomial) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Finds and classifies all roots.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xl_roots_find(h: *const XlPolynomial, out: *mut *mut XlRootSet) -> XlStatus {
    guard(|| {
        let q = h.as_ref().ok_or_else(|| null("polynomial"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rs = find_roots(&q.0).map_err(lib)?;
        *out = Box::into_raw(Box::new(XlRootSet(rs)));
        Ok(())
    })
}

/// Number of roots, or 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xl_roots_len(h: *const XlRootSet) -> usize {
    h.as_ref().map_or(0, |r| r.0.len())
}

/// Root `i` in the sorted order (by real part, then imaginary part).
///
/// # Safety
/// `h` must be a live handle; `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn xl_roots_get(h: *const XlRootSet, i: usize, re: *mut f64, im: *mut f64) -> XlStatus {
    guard(|| {
        let r = h.as_ref().ok_or_else(|| null("roots"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let z = r.0.roots.get(i).ok_or_else(|| (XlStatus::XL_OUT_OF_RANGE, format!("root {i} of {}", r.0.len())))?;
        let (a, b) = z.to_f64_pair();
        *re = a;
        *im = b;
        Ok(())
    })
}

/// Number of conjugate pairs, or 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xl_roots_complex_pairs(h: *const XlRootSet) -> usize {
    h.as_ref().map_or(0, |r| r.0.n_complex_pairs())
}

/// 1 when every root is real, 0 otherwise (or for NULL).
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xl_roots_all_real(h: *const XlRootSet) -> i32 {
    h.as_ref().map_or(0, |r| r.0.on_critical_line as i32)
}

/// # Safety
/// `h` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xl_roots_free(h: *mut XlRootSet) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Runs the summary table and returns it as JSON. `rows` is a comma-separated
/// id list or NULL for all rows; `published` selects the literature couplings
/// for the Riemann and Ramanujan rows.
///
/// # Safety
/// `rows` must be NULL or NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn xl_table1_json(
    rows: *const c_char,
    n: usize,
    digits: u32,
    published: i32,
    out: *mut *mut c_char,
) -> XlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ids: Vec<&str> = if rows.is_null() {
            TABLE1_ROWS.to_vec()
        } else {
            str_arg(rows, "rows")?.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
        };
        let mut s = RunSettings::new(n, precision(digits)?);
        if published != 0 {
            s.couplings = CouplingSource::Published;
        }
        let report = run_table1(&ids, &s).map_err(lib)?;
        *out = into_c_string(serde_json::to_string(&report).map_err(|e| lib(e.into()))?)?;
        Ok(())
    })
}
