//! C ABI over the weightlab engines.
//!
//! Every function returns a [`WlStatus`]; on failure the message is available
//! from [`wl_last_error_message`] on the same thread. Strings handed out by the
//! library are released with [`wl_string_free`], weights with
//! [`wl_weight_free`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use weightlab::geometry::{DiskPoint, SpaceParams};
use weightlab::quad::Convergence;
use weightlab::symbols::Symbol;
use weightlab::transforms::{berezin, QuadratureGrid};
use weightlab::weight_classes::{power_weight_oracle, PowerVariant};
use weightlab::{Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidParams = 4,
    Unsupported = 5,
    Budget = 6,
    Numeric = 7,
    Panic = 8,
}

/// Convergence of a returned estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlConvergence {
    Convergent = 0,
    Divergent = 1,
    Unresolved = 2,
}

/// Opaque parsed weight or symbol.
pub struct WlWeight {
    inner: Symbol,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(err: &Error) -> WlStatus {
    match err {
        Error::Parse { .. } => WlStatus::Parse,
        Error::InvalidParams(_) => WlStatus::InvalidParams,
        Error::Unsupported(_) => WlStatus::Unsupported,
        Error::Budget { .. } => WlStatus::Budget,
        _ => WlStatus::Numeric,
    }
}

fn guard<F: FnOnce() -> Result<(), (WlStatus, String)>>(f: F) -> WlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside weightlab");
            WlStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (WlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (WlStatus, String) {
    (WlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (WlStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (WlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn convergence(c: Convergence) -> WlConvergence {
    match c {
        Convergence::Convergent => WlConvergence::Convergent,
        Convergence::Divergent => WlConvergence::Divergent,
        Convergence::Unresolved => WlConvergence::Unresolved,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn wl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a weight or symbol in the DSL, e.g. `analytic:a=0.1`.
///
/// # Safety
/// `dsl` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_parse(dsl: *const c_char, out: *mut *mut WlWeight) -> WlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let s = read_str(dsl, "dsl")?;
        let inner: Symbol = s.parse().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(WlWeight { inner }));
        Ok(())
    })
}

/// # Safety
/// `w` must come from [`wl_weight_parse`] and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_free(w: *mut WlWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Canonical DSL form of a weight; release with [`wl_string_free`].
///
/// # Safety
/// `w` must be a live weight and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_to_string(w: *const WlWeight, out: *mut *mut c_char) -> WlStatus {
    guard(|| {
        if w.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let s = CString::new((*w).inner.to_string()).map_err(|_| (WlStatus::Numeric, "interior NUL".into()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// Value of the symbol at `re + i·im` in the unit disk.
///
/// # Safety
/// `w` must be a live weight; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_eval_disk(
    w: *const WlWeight,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> WlStatus {
    guard(|| {
        if w.is_null() || out_re.is_null() || out_im.is_null() {
            return Err(null("argument"));
        }
        let z = C64::new(re, im);
        if !(z.norm() < 1.0) {
            return Err((WlStatus::InvalidParams, "point must lie in the open unit disk".into()));
        }
        let v = (*w).inner.eval_disk(DiskPoint::from_complex(z));
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// Closed-form membership of `(1-|z|²)^ζ`; `invariant` selects the invariant class.
///
/// # Safety
/// `out_member` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_power_weight_oracle(
    zeta: f64,
    p: f64,
    gamma: f64,
    n: u32,
    invariant: bool,
    out_member: *mut bool,
) -> WlStatus {
    guard(|| {
        if out_member.is_null() {
            return Err(null("out_member"));
        }
        let variant = if invariant {
            PowerVariant::Invariant
        } else {
            PowerVariant::Plain
        };
        *out_member = power_weight_oracle(zeta, p, gamma, n as usize, variant).map_err(lib_err)?;
        Ok(())
    })
}

/// `B_γ(|w|)(z)` on the disk at grid level `level`.
///
/// # Safety
/// `w` must be a live weight; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_berezin(
    w: *const WlWeight,
    gamma: f64,
    re: f64,
    im: f64,
    level: u32,
    out_value: *mut f64,
    out_convergence: *mut WlConvergence,
) -> WlStatus {
    guard(|| {
        if w.is_null() || out_value.is_null() || out_convergence.is_null() {
            return Err(null("argument"));
        }
        let params = SpaceParams::bergman_disk(gamma, 2.0).map_err(lib_err)?;
        let grid = QuadratureGrid::disk(&params, level as usize).map_err(lib_err)?;
        let e = berezin(&(*w).inner, DiskPoint::from_complex(C64::new(re, im)), &grid).map_err(lib_err)?;
        *out_value = e.value;
        *out_convergence = convergence(e.status);
        Ok(())
    })
}

/// Runs a CLI job from its JSON config. The report is returned even when the
/// job fails; `out_exit` receives the CLI exit code.
///
/// # Safety
/// `config` must be a valid C string; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_run_job_json(
    config: *const c_char,
    out_report: *mut *mut c_char,
    out_exit: *mut c_int,
) -> WlStatus {
    guard(|| {
        if out_report.is_null() || out_exit.is_null() {
            return Err(null("argument"));
        }
        *out_report = ptr::null_mut();
        let cfg = read_str(config, "config")?;
        let out = weightlab::cli::run_json(cfg);
        let s = CString::new(out.report_string()).map_err(|_| (WlStatus::Numeric, "interior NUL".into()))?;
        *out_exit = out.exit_code;
        *out_report = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn wl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
