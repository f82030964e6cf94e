//! C ABI over `carpet-dim`.
//!
//! Systems live behind the opaque `CarpetSystem` handle. Every fallible call
//! returns a `CarpetStatus`; on failure `carpet_last_error()` describes the
//! error until the next call on the same thread. Strings returned by the
//! library must be released with `carpet_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use carpet_dim::conditions::{condition_report, ConditionOptions};
use carpet_dim::dimension::dimension_report;
use carpet_dim::json::to_stable_string;
use carpet_dim::{gallery, Error, SystemSpec, TglSystem};

/// Status codes; the non-zero values match the command-line exit codes
/// where one exists.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarpetStatus {
    Ok = 0,
    /// The system or an argument failed validation.
    Invalid = 2,
    /// A numerical routine failed to converge or bracket.
    Numeric = 3,
    Io = 4,
    /// A required pointer was null or a string was not UTF-8.
    BadArgument = 64,
    /// A Rust panic was caught at the boundary.
    Internal = 70,
}

/// Opaque validated system.
pub struct CarpetSystem(TglSystem);

/// Headline dimension quantities of a system.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CarpetDimensions {
    /// Maximum of the Ledrappier-Young expression over Bernoulli weights.
    pub alpha_star: f64,
    /// Root of the box-counting equation.
    pub s: f64,
    /// Affinity dimension.
    pub s_a: f64,
    /// Box dimension of the projection onto the horizontal axis.
    pub s_h: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CarpetStatus {
    match e.exit_code() {
        3 => CarpetStatus::Numeric,
        4 => CarpetStatus::Io,
        64 => CarpetStatus::BadArgument,
        _ => CarpetStatus::Invalid,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (CarpetStatus, String)>) -> CarpetStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CarpetStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            CarpetStatus::Internal
        }
    }
}

fn lib_err(e: impl Into<Error>) -> (CarpetStatus, String) {
    let e = e.into();
    (status_of(&e), e.to_string())
}

fn bad_arg(msg: &str) -> (CarpetStatus, String) {
    (CarpetStatus::BadArgument, msg.to_string())
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, (CarpetStatus, String)> {
    if s.is_null() {
        return Err(bad_arg(&format!("{name} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| bad_arg(&format!("{name} is not UTF-8")))
}

/// # Safety
/// `h` must be null or a live handle.
unsafe fn system_arg<'a>(h: *const CarpetSystem) -> Result<&'a TglSystem, (CarpetStatus, String)> {
    h.as_ref().map(|s| &s.0).ok_or_else(|| bad_arg("system handle is null"))
}

fn string_out(out: *mut *mut c_char, s: String) -> Result<(), (CarpetStatus, String)> {
    let c = CString::new(s).map_err(|_| bad_arg("output contains NUL"))?;
    // SAFETY: callers check `out` for null before computing `s`.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Parses and validates a system from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn carpet_system_from_json(json: *const c_char, out: *mut *mut CarpetSystem) -> CarpetStatus {
    guard(|| {
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let text = str_arg(json, "json")?;
        let sys = SystemSpec::from_json(text).and_then(|s| s.validate()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CarpetSystem(sys)));
        Ok(())
    })
}

/// Builds a gallery entry; `n_params == 0` selects its default parameters.
///
/// # Safety
/// `name` must be a NUL-terminated string, `params` must point to `n_params`
/// doubles (or be null when `n_params` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carpet_system_from_gallery(
    name: *const c_char,
    params: *const f64,
    n_params: usize,
    out: *mut *mut CarpetSystem,
) -> CarpetStatus {
    guard(|| {
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let name = str_arg(name, "name")?;
        let params: &[f64] = match (params.is_null(), n_params) {
            (_, 0) => &[],
            (true, _) => return Err(bad_arg("params is null")),
            (false, n) => std::slice::from_raw_parts(params, n),
        };
        let built = gallery::build(name, params).map_err(lib_err)?;
        let sys = built.system.validate().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CarpetSystem(sys)));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `system` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn carpet_system_free(system: *mut CarpetSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Number of maps, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn carpet_system_len(system: *const CarpetSystem) -> usize {
    system.as_ref().map_or(0, |s| s.0.len())
}

/// Computes the headline dimensions.
///
/// # Safety
/// `system` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn carpet_dimensions(system: *const CarpetSystem, out: *mut CarpetDimensions) -> CarpetStatus {
    guard(|| {
        let sys = system_arg(system)?;
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let r = dimension_report(sys).map_err(lib_err)?;
        *out = CarpetDimensions { alpha_star: r.alpha_star, s: r.s, s_a: r.s_a, s_h: r.s_h };
        Ok(())
    })
}

/// Full dimension report as JSON with sorted keys.
///
/// # Safety
/// `system` must be a live handle and `out` writable; free the result with
/// `carpet_string_free`.
#[no_mangle]
pub unsafe extern "C" fn carpet_dimension_report_json(system: *const CarpetSystem, out: *mut *mut c_char) -> CarpetStatus {
    guard(|| {
        let sys = system_arg(system)?;
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let r = dimension_report(sys).map_err(lib_err)?;
        string_out(out, to_stable_string(&r))
    })
}

/// Separation and overlap conditions as JSON with sorted keys.
///
/// # Safety
/// `system` must be a live handle and `out` writable; free the result with
/// `carpet_string_free`.
#[no_mangle]
pub unsafe extern "C" fn carpet_condition_report_json(system: *const CarpetSystem, out: *mut *mut c_char) -> CarpetStatus {
    guard(|| {
        let sys = system_arg(system)?;
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let r = condition_report(sys, &ConditionOptions::default()).map_err(lib_err)?;
        string_out(out, to_stable_string(&r))
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn carpet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn carpet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn carpet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
