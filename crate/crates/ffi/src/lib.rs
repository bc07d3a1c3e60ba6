//! C ABI over the varalg engine.
//!
//! Systems and trajectories are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`VaStatus`]; on anything other than `VA_OK` or `VA_CHECK_FAILED` the
//! message is available from [`va_last_error_message`] on the same thread.
//! Strings returned through out-parameters are allocated here and must be
//! released with [`va_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use varalg::config::{CheckSettings, ConfigDocument, System};
use varalg::dynamics::Trajectory;
use varalg::{report, scenarios, Error};

/// Status codes. Values 0 to 2 match the exit codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaStatus {
    VaOk = 0,
    /// The call ran to completion and at least one check failed.
    VaCheckFailed = 1,
    /// Invalid configuration, expression or dimensions.
    VaConfig = 2,
    /// Singular Lagrangian, non-finite state or another numerical failure.
    VaNumerical = 3,
    VaNullPointer = 4,
    /// Input string is not valid UTF-8 or an index is out of range.
    VaInvalidArgument = 5,
    /// A Rust panic was caught at the boundary.
    VaPanic = 6,
}

/// A validated system built from a JSON configuration.
pub struct VaSystem {
    inner: System,
}

/// A sampled solution. States hold `x` followed by `y_1 .. y_{2k-1}`.
pub struct VaTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> VaStatus {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Dimension(_) | Error::Unsupported(_) | Error::InvalidOrder(_) => VaStatus::VaConfig,
        _ => VaStatus::VaNumerical,
    }
}

fn fail(status: VaStatus, msg: impl Into<String>) -> VaStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<VaStatus, (VaStatus, String)>) -> VaStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => fail(s, msg),
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into());
            fail(VaStatus::VaPanic, format!("panic: {msg}"))
        }
    }
}

fn lift(e: Error) -> (VaStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (VaStatus, String) {
    (VaStatus::VaNullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a NUL-terminated string valid for reads.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (VaStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (VaStatus::VaInvalidArgument, format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

/// # Safety
/// `out` must be null or valid for one pointer write.
unsafe fn write_string(out: *mut *mut c_char, s: String) {
    if !out.is_null() {
        *out = into_c_string(s);
    }
}

fn verdict(passed: bool) -> VaStatus {
    if passed {
        VaStatus::VaOk
    } else {
        VaStatus::VaCheckFailed
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn va_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn va_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn va_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a system from a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn va_system_from_json(json: *const c_char, out: *mut *mut VaSystem) -> VaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let sys = ConfigDocument::from_json(text).and_then(|d| d.build()).map_err(lift)?;
        *out = Box::into_raw(Box::new(VaSystem { inner: sys }));
        Ok(VaStatus::VaOk)
    })
}

/// Builds the system of a bundled scenario by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn va_system_from_scenario(name: *const c_char, out: *mut *mut VaSystem) -> VaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name = read_str(name, "name")?;
        let sys = scenarios::scenario(name).and_then(|sc| sc.system()).map_err(lift)?;
        *out = Box::into_raw(Box::new(VaSystem { inner: sys }));
        Ok(VaStatus::VaOk)
    })
}

/// # Safety
/// `sys` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn va_system_free(sys: *mut VaSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Writes base rank `n`, fibre rank `m` and Lagrangian order `k`.
///
/// # Safety
/// `sys` must be a live handle; each out pointer must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn va_system_dims(sys: *const VaSystem, n: *mut usize, m: *mut usize, k: *mut usize) -> VaStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("sys"))?;
        let s = &sys.inner;
        for (p, v) in [(n, s.algebroid.n()), (m, s.algebroid.m()), (k, s.lagrangian.order())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(VaStatus::VaOk)
    })
}

/// Runs the structure, morphism, operator, symmetry and regularity checks.
/// Returns `VA_CHECK_FAILED` when a check fails; the JSON report is written
/// to `report_json` in both cases when it is non-null.
///
/// # Safety
/// `sys` must be a live handle; `report_json` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn va_system_check(sys: *const VaSystem, report_json: *mut *mut c_char) -> VaStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("sys"))?;
        let r = report::check(&sys.inner, &sys.inner.doc.checks).map_err(lift)?;
        write_string(report_json, r.to_json());
        Ok(verdict(r.passed))
    })
}

/// Integrates the system over its configured run. The trajectory is written
/// whenever integration completes, including when a drift check fails.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable; `report_json` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn va_system_simulate(sys: *const VaSystem, out: *mut *mut VaTrajectory, report_json: *mut *mut c_char) -> VaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let sys = sys.as_ref().ok_or_else(|| null("sys"))?;
        let settings: CheckSettings = sys.inner.doc.checks;
        let (r, traj) = report::simulate(&sys.inner, &settings).map_err(lift)?;
        write_string(report_json, r.to_json());
        *out = Box::into_raw(Box::new(VaTrajectory { inner: traj }));
        Ok(verdict(r.passed))
    })
}

/// # Safety
/// `traj` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn va_trajectory_free(traj: *mut VaTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn va_trajectory_len(traj: *const VaTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// Length of one state vector, `n + (2k-1) m`, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn va_trajectory_state_dim(traj: *const VaTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.states.first().map_or(0, Vec::len))
}

/// Copies the time grid into `buf`, which must hold `va_trajectory_len` values.
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn va_trajectory_times(traj: *const VaTrajectory, buf: *mut f64, len: usize) -> VaStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let src = &t.inner.times;
        if len < src.len() {
            return Err((VaStatus::VaInvalidArgument, format!("buffer holds {len} values, need {}", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(VaStatus::VaOk)
    })
}

/// Copies the state at grid point `i` into `buf`, which must hold
/// `va_trajectory_state_dim` values.
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn va_trajectory_state(traj: *const VaTrajectory, i: usize, buf: *mut f64, len: usize) -> VaStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let src = t.inner.states.get(i).ok_or_else(|| (VaStatus::VaInvalidArgument, format!("index {i} out of range for {} points", t.inner.len())))?;
        if len < src.len() {
            return Err((VaStatus::VaInvalidArgument, format!("buffer holds {len} values, need {}", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(VaStatus::VaOk)
    })
}

/// Writes the trajectory as CSV with a header row.
///
/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn va_trajectory_to_csv(traj: *const VaTrajectory, out: *mut *mut c_char) -> VaStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(t.inner.to_csv());
        Ok(VaStatus::VaOk)
    })
}
