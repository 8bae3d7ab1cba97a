//! C ABI over `ldp_osc`.
//!
//! Methods are opaque handles created from a selector or from the text of a
//! method-definition file and released with `ldp_method_free`. Every fallible
//! call returns an `LdpStatus`; on failure `ldp_last_error_message` describes
//! the error until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ldp_osc::law::{interval_probability, law_a_n, law_b_n, law_na_n, law_x_n};
use ldp_osc::ldp::{rate_function, Regime};
use ldp_osc::method::{check_conditions, lookup, MethodDef, MethodFile, DEFAULT_TOLERANCE};
use ldp_osc::{Error, GaussianLaw, Observable, OscillatorParams, RateFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    OutOfRange = 4,
    InvalidMethod = 5,
    UnknownMethod = 6,
    Parse = 7,
    Inapplicable = 8,
    Spectral = 9,
    Invariant = 10,
    Io = 11,
    InvalidArgument = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdpObservable {
    MeanPosition = 0,
    MeanVelocity = 1,
}

/// Which finite-N law `ldp_law` returns.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdpStatistic {
    /// `N A_N`, the sum of the first N positions.
    SumPosition = 0,
    /// `x_N`.
    TerminalPosition = 1,
    /// `A_N`.
    MeanPosition = 2,
    /// `B_N = x_N / (N h)`.
    MeanVelocity = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdpRegime {
    None = 0,
    Symplectic = 1,
    NonSymplectic = 2,
}

/// Opaque method handle.
pub struct LdpMethod {
    def: MethodDef,
    name: CString,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LdpCoefficients {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub b1: f64,
    pub b2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LdpConditions {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub symplectic: bool,
    pub excluded: bool,
    pub det: f64,
    pub trace: f64,
    pub total_weight: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LdpParams {
    pub alpha: f64,
    pub x0: f64,
    pub y0: f64,
}

/// Rate functions are `c y^2`; a degenerate rate has `degenerate = true`
/// and coefficients of `+inf`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpRate {
    pub applicable: bool,
    pub regime: LdpRegime,
    pub degenerate: bool,
    pub coefficient: f64,
    pub modified_coefficient: f64,
    pub log_mgf_coefficient: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LdpLaw {
    pub mean: f64,
    pub variance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LdpStatus {
    match e {
        Error::Domain(_) => LdpStatus::Domain,
        Error::OutOfRange { .. } => LdpStatus::OutOfRange,
        Error::InvalidMethod { .. } => LdpStatus::InvalidMethod,
        Error::ComplexPairFailed(_) | Error::NearDegenerateSpectrum(_) => LdpStatus::Spectral,
        Error::Inapplicable(_) => LdpStatus::Inapplicable,
        Error::IndexOutOfRange { .. } | Error::Usage(_) => LdpStatus::InvalidArgument,
        Error::Parse { .. } => LdpStatus::Parse,
        Error::UnknownMethod(_) => LdpStatus::UnknownMethod,
        Error::Invariant(_) => LdpStatus::Invariant,
        Error::Io(_) => LdpStatus::Io,
    }
}

/// Runs `f`, turning errors and panics into a status plus the last-error message.
fn guard(f: impl FnOnce() -> Result<(), (LdpStatus, String)>) -> LdpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LdpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside ldp_osc".to_string());
            LdpStatus::Panic
        }
    }
}

fn lib<T>(r: ldp_osc::Result<T>) -> Result<T, (LdpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (LdpStatus, String) {
    (LdpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LdpStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (LdpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn method_ref<'a>(m: *const LdpMethod) -> Result<&'a LdpMethod, (LdpStatus, String)> {
    m.as_ref().ok_or_else(|| null("method"))
}

fn observable(o: i32) -> Result<Observable, (LdpStatus, String)> {
    match o {
        0 => Ok(Observable::MeanPosition),
        1 => Ok(Observable::MeanVelocity),
        _ => Err((LdpStatus::InvalidArgument, format!("unknown observable {o}"))),
    }
}

unsafe fn params(p: *const LdpParams) -> Result<OscillatorParams, (LdpStatus, String)> {
    let p = p.as_ref().ok_or_else(|| null("params"))?;
    Ok(OscillatorParams {
        alpha: p.alpha,
        x0: p.x0,
        y0: p.y0,
    })
}

fn into_handle(def: MethodDef, out: *mut *mut LdpMethod) {
    let name = CString::new(def.name().replace('\0', " ")).expect("interior nul removed");
    let h = Box::new(LdpMethod { def, name });
    // SAFETY: caller checked `out` for null.
    unsafe { *out = Box::into_raw(h) };
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ldp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ldp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Looks up a built-in method (`midpoint`, `beta:0.3`, `ex`, `M4`, ...) or
/// `file:<path>`.
///
/// # Safety
/// `selector` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldp_method_from_selector(selector: *const c_char, out: *mut *mut LdpMethod) -> LdpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sel = read_str(selector, "selector")?;
        into_handle(lib(lookup(sel))?, out);
        Ok(())
    })
}

/// Parses the text of a method-definition file.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldp_method_from_text(text: *const c_char, out: *mut *mut LdpMethod) -> LdpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = read_str(text, "text")?;
        into_handle(MethodDef::from_file(lib(MethodFile::parse(t))?), out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` must come from an `ldp_method_from_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ldp_method_free(m: *mut LdpMethod) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Name of the method; owned by the handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ldp_method_name(m: *const LdpMethod) -> *const c_char {
    m.as_ref().map_or(ptr::null(), |m| m.name.as_ptr())
}

/// `(A, b)` at step `h`, checked against the admissible range.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldp_method_coefficients(m: *const LdpMethod, h: f64, out: *mut LdpCoefficients) -> LdpStatus {
    guard(|| {
        let m = method_ref(m)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = lib(m.def.evaluate(h))?;
        *out = LdpCoefficients {
            a11: c.a.a11,
            a12: c.a.a12,
            a21: c.a.a21,
            a22: c.a.a22,
            b1: c.b.b1,
            b2: c.b.b2,
        };
        Ok(())
    })
}

/// Assumption flags at step `h`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldp_conditions(m: *const LdpMethod, h: f64, out: *mut LdpConditions) -> LdpStatus {
    guard(|| {
        let m = method_ref(m)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = check_conditions(&lib(m.def.evaluate(h))?, DEFAULT_TOLERANCE);
        *out = LdpConditions {
            a1: r.a1,
            a2: r.a2,
            a3: r.a3,
            a4: r.a4,
            symplectic: r.symplectic,
            excluded: r.excluded,
            det: r.det,
            trace: r.trace,
            total_weight: r.total_weight,
        };
        Ok(())
    })
}

/// Rate function of `observable` (an `LdpObservable` value) at step `h`.
/// An inapplicable configuration is not an error: `applicable` is false and
/// the message is available from `ldp_last_error_message`.
///
/// # Safety
/// `m` and `p` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldp_rate(
    m: *const LdpMethod,
    h: f64,
    observable_id: i32,
    p: *const LdpParams,
    out: *mut LdpRate,
) -> LdpStatus {
    guard(|| {
        let m = method_ref(m)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let obs = observable(observable_id)?;
        let params = params(p)?;
        lib(params.validate())?;
        let cls = lib(rate_function(&m.def, h, obs, &params))?;
        let coef = |r: Option<RateFunction>| r.map_or(f64::NAN, |r| r.coefficient_or_inf());
        *out = LdpRate {
            applicable: cls.applicable,
            regime: match cls.regime {
                None => LdpRegime::None,
                Some(Regime::Symplectic) => LdpRegime::Symplectic,
                Some(Regime::NonSymplectic) => LdpRegime::NonSymplectic,
            },
            degenerate: cls.rate == Some(RateFunction::Degenerate),
            coefficient: coef(cls.rate),
            modified_coefficient: coef(cls.modified_rate),
            log_mgf_coefficient: cls.log_mgf.unwrap_or(f64::NAN),
        };
        if let Some(r) = cls.reason {
            set_error(r);
        }
        Ok(())
    })
}

/// Exact Gaussian law of a finite-N statistic (an `LdpStatistic` value).
///
/// # Safety
/// `m` and `p` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldp_law(
    m: *const LdpMethod,
    h: f64,
    n: u64,
    statistic: i32,
    p: *const LdpParams,
    out: *mut LdpLaw,
) -> LdpStatus {
    guard(|| {
        let m = method_ref(m)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let params = params(p)?;
        let f = match statistic {
            0 => law_na_n,
            1 => law_x_n,
            2 => law_a_n,
            3 => law_b_n,
            s => return Err((LdpStatus::InvalidArgument, format!("unknown statistic {s}"))),
        };
        let law = lib(f(&m.def, h, n, &params))?;
        *out = LdpLaw {
            mean: law.mean,
            variance: law.variance,
        };
        Ok(())
    })
}

/// `ln P(lo <= X <= hi)` for `X ~ N(mean, variance)`; endpoints may be
/// infinite. Accurate far into the tails.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldp_interval_log_probability(
    mean: f64,
    variance: f64,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> LdpStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !(variance >= 0.0 && variance.is_finite() && mean.is_finite()) {
            return Err((LdpStatus::Domain, format!("invalid law N({mean}, {variance})")));
        }
        *out = lib(interval_probability(&GaussianLaw::new(mean, variance), lo, hi))?.ln();
        Ok(())
    })
}
