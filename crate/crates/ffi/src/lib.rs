//! C ABI over the fracheat library.
//!
//! Functions return an [`FhStatus`] and write results through out-pointers.
//! Sampled functions are opaque [`FhFunction`] handles released with
//! [`fh_function_free`]; strings returned to the caller are released with
//! [`fh_string_free`]. The message of the last failure on the calling thread
//! is available from [`fh_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fracheat::cli::{run_toml, to_json, EXIT_NUMERICAL, EXIT_VALIDATION, EXIT_VIOLATIONS};
use fracheat::families::FunctionSpec;
use fracheat::grid::{PeriodicGrid, SampledFunction};
use fracheat::heat::{heat_deriv_field, semigroup_apply, FracHeatParams, TimeGrid};
use fracheat::kernel::kernel_derivative;
use fracheat::lipschitz::{lambda_s_seminorm_diff, lambda_s_seminorm_heat};
use fracheat::Error;

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Numerical = 3,
    /// A verification command found violations; the report is still returned.
    Violations = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Opaque handle to a sampled periodic function.
pub struct FhFunction {
    inner: SampledFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: FhStatus, msg: impl Into<String>) -> FhStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> FhStatus {
    let status = match e {
        Error::InvalidParameter(_) | Error::GridMismatch(_) | Error::GridTooSmall(_) => FhStatus::InvalidParameter,
        Error::NonHermitian(_) | Error::Quadrature { .. } | Error::Numerical(_) => FhStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> FhStatus) -> FhStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(FhStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, FhStatus> {
    if p.is_null() {
        return Err(fail(FhStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(FhStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn boxed(f: SampledFunction) -> *mut FhFunction {
    Box::into_raw(Box::new(FhFunction { inner: f }))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn fh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string; do not free it.
#[no_mangle]
pub extern "C" fn fh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a function from `len` samples on a `dim`-dimensional grid of side `size`.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be a valid
/// pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn fh_function_from_samples(
    dim: usize,
    size: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut FhFunction,
) -> FhStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            return fail(FhStatus::NullPointer, "null argument");
        }
        let data = std::slice::from_raw_parts(values, len).to_vec();
        match PeriodicGrid::new(dim, size).and_then(|g| SampledFunction::new(g, data)) {
            Ok(f) => {
                *out = boxed(f);
                FhStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Build a named test function from a JSON description such as
/// `{"family":"lacunary","s":0.5}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` a valid pointer to
/// writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn fh_function_from_spec(
    dim: usize,
    size: usize,
    spec_json: *const c_char,
    out: *mut *mut FhFunction,
) -> FhStatus {
    guard(|| {
        if out.is_null() {
            return fail(FhStatus::NullPointer, "null out pointer");
        }
        let text = match read_str(spec_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let spec: FunctionSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(FhStatus::InvalidParameter, format!("function spec: {e}")),
        };
        match PeriodicGrid::new(dim, size).and_then(|g| spec.build(g)) {
            Ok(f) => {
                *out = boxed(f);
                FhStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Release a handle; NULL is ignored.
///
/// # Safety
/// `f` must be NULL or a handle returned by this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn fh_function_free(f: *mut FhFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of samples held by the handle.
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fh_function_len(f: *const FhFunction, out: *mut usize) -> FhStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            return fail(FhStatus::NullPointer, "null argument");
        }
        *out = (*f).inner.values().len();
        FhStatus::Ok
    })
}

/// Copy the samples into `buf`, which must hold exactly as many values as
/// [`fh_function_len`] reports.
///
/// # Safety
/// `f` must be a live handle and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fh_function_values(f: *const FhFunction, buf: *mut f64, len: usize) -> FhStatus {
    guard(|| {
        if f.is_null() || buf.is_null() {
            return fail(FhStatus::NullPointer, "null argument");
        }
        let v = (*f).inner.values();
        if v.len() != len {
            return fail(FhStatus::InvalidParameter, format!("buffer holds {len} values, function has {}", v.len()));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, len);
        FhStatus::Ok
    })
}

/// `T_{α,t} f` as a new handle.
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fh_semigroup_apply(
    f: *const FhFunction,
    alpha: f64,
    t: f64,
    out: *mut *mut FhFunction,
) -> FhStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            return fail(FhStatus::NullPointer, "null argument");
        }
        match semigroup_apply(&(*f).inner, alpha, t) {
            Ok(g) => {
                *out = boxed(g);
                FhStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Radial derivative of order `k` of the kernel `K_α` in dimension `n`,
/// with its quadrature error estimate.
///
/// # Safety
/// `value` and `error` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fh_kernel(
    alpha: f64,
    n: usize,
    k: usize,
    x: f64,
    value: *mut f64,
    error: *mut f64,
) -> FhStatus {
    guard(|| {
        if value.is_null() || error.is_null() {
            return fail(FhStatus::NullPointer, "null argument");
        }
        match kernel_derivative(alpha, n, k, x) {
            Ok(v) => {
                *value = v.value;
                *error = v.error;
                FhStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Heat-side and difference-side `Λ_s` seminorms; the difference order is `⌊s⌋ + 1`.
///
/// # Safety
/// `f` must be a live handle; `heat` and `diff` must be valid pointers.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fh_lambda_s_seminorms(
    f: *const FhFunction,
    alpha: f64,
    r: u32,
    s: f64,
    octaves: usize,
    per_octave: usize,
    heat: *mut f64,
    diff: *mut f64,
) -> FhStatus {
    guard(|| {
        if f.is_null() || heat.is_null() || diff.is_null() {
            return fail(FhStatus::NullPointer, "null argument");
        }
        let res = FracHeatParams::new(alpha, r, s).and_then(|p| {
            let times = TimeGrid::new(octaves, per_octave)?;
            let h = lambda_s_seminorm_heat(&(*f).inner, p, times);
            let d = lambda_s_seminorm_diff(&(*f).inner, s, s.floor() as u32 + 1)?;
            Ok((h, d))
        });
        match res {
            Ok((h, d)) => {
                *heat = h;
                *diff = d;
                FhStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// The envelope `max t^{αr-s} |∂_t^r u|` over the time grid.
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fh_envelope(
    f: *const FhFunction,
    alpha: f64,
    r: u32,
    s: f64,
    octaves: usize,
    per_octave: usize,
    out: *mut f64,
) -> FhStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            return fail(FhStatus::NullPointer, "null argument");
        }
        let res = FracHeatParams::new(alpha, r, s)
            .and_then(|p| Ok(heat_deriv_field(&(*f).inner, p, TimeGrid::new(octaves, per_octave)?).envelope()));
        match res {
            Ok(v) => {
                *out = v;
                FhStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Run a CLI command (`kernel`, `lipnorm`, `verify`, ...) on a TOML config
/// and return its JSON document in `*out`, to be released with
/// [`fh_string_free`]. `Violations` still sets `*out`.
///
/// # Safety
/// `command` and `config_toml` must be NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fh_run_json(
    command: *const c_char,
    config_toml: *const c_char,
    out: *mut *mut c_char,
) -> FhStatus {
    guard(|| {
        if out.is_null() {
            return fail(FhStatus::NullPointer, "null out pointer");
        }
        let (cmd, cfg) = match (read_str(command), read_str(config_toml)) {
            (Ok(c), Ok(t)) => (c, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match run_toml(cmd, cfg) {
            Ok(art) => {
                let text = to_json(&art.document);
                *out = CString::new(text).map_or(ptr::null_mut(), CString::into_raw);
                if art.exit_code == EXIT_VIOLATIONS {
                    fail(FhStatus::Violations, "verification found violations")
                } else {
                    FhStatus::Ok
                }
            }
            Err(e) => {
                let status = match e.code {
                    EXIT_VALIDATION => FhStatus::InvalidParameter,
                    EXIT_NUMERICAL => FhStatus::Numerical,
                    _ => FhStatus::Numerical,
                };
                fail(status, e.message)
            }
        }
    })
}

/// Release a string returned by this library; NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string returned by [`fh_run_json`] that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn fh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_values_match_cli_codes() {
        assert_eq!(FhStatus::InvalidParameter as i32, EXIT_VALIDATION);
        assert_eq!(FhStatus::Numerical as i32, EXIT_NUMERICAL);
        assert_eq!(FhStatus::Violations as i32, EXIT_VIOLATIONS);
    }

    #[test]
    fn error_message_is_thread_local_and_cleared() {
        let mut h = ptr::null_mut();
        let st = unsafe { fh_function_from_samples(1, 3, [0.0; 3].as_ptr(), 3, &mut h) };
        assert_eq!(st, FhStatus::InvalidParameter);
        assert!(!fh_last_error().is_null());
        let st = unsafe { fh_function_from_samples(1, 8, [0.0; 8].as_ptr(), 8, &mut h) };
        assert_eq!(st, FhStatus::Ok);
        assert!(fh_last_error().is_null());
        unsafe { fh_function_free(h) };
    }
}
