//! C interface to `mountctl`.
//!
//! Plants, fuzzy controllers and traces cross the boundary as opaque
//! handles that the caller frees with the matching `*_free` function.
//! Every fallible call returns a [`MountStatus`]; on failure a description
//! is available from [`mount_last_error`] until the next failing call on
//! the same thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mountctl::controllers::{Controller, PdGains, Reference};
use mountctl::fuzzy::FuzzyController;
use mountctl::integrator::{simulate, SimConfig, SimTrace};
use mountctl::metrics::analyze;
use mountctl::plant::{PlantParams, Vec2};
use mountctl::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MountStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Diverged = 4,
    Numerical = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque plant parameters.
pub struct MountPlant(PlantParams);

/// Opaque fuzzy controller definition.
pub struct MountFuzzy(FuzzyController);

/// Opaque simulation result, remembering the reference it tracked.
pub struct MountTrace {
    trace: SimTrace,
    reference: Reference,
}

/// Step experiment settings; the mount starts at rest at zero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MountSimConfig {
    pub step_size: f64,
    pub duration: f64,
    /// Set-point in radians.
    pub theta_desired: [f64; 2],
}

/// Step metrics; absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MountMetrics {
    pub rise_time: [f64; 2],
    pub settling_time: [f64; 2],
    pub overshoot_pct: [f64; 2],
    pub itae: f64,
}

/// Number of values per trace row: t, θ1, θ2, θ̇1, θ̇2, τ1, τ2, e1, e2.
pub const MOUNT_TRACE_COLUMNS: usize = 9;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: MountStatus, msg: impl Into<String>) -> MountStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> MountStatus {
    match e {
        Error::Parse { .. } => MountStatus::Parse,
        Error::Diverged { .. } => MountStatus::Diverged,
        Error::Singular { .. } | Error::Integration { .. } | Error::Domain(_) | Error::DegenerateReference => {
            MountStatus::Numerical
        }
        _ => MountStatus::InvalidArgument,
    }
}

fn from_error(e: Error) -> MountStatus {
    fail(status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> MountStatus) -> MountStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(MountStatus::Panic, "internal panic"))
}

/// Stores `value` behind `out`, which must be non-null.
unsafe fn emit<T>(out: *mut *mut T, value: T) -> MountStatus {
    *out = Box::into_raw(Box::new(value));
    MountStatus::Ok
}

/// Message for the most recent failure on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn mount_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mount_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates the default mount profile.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mount_plant_default(out: *mut *mut MountPlant) -> MountStatus {
    guard(|| {
        if out.is_null() {
            return fail(MountStatus::NullPointer, "out is null");
        }
        emit(out, MountPlant(PlantParams::default()))
    })
}

/// Creates a plant from inertia coefficients, gravity off.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mount_plant_new(a1: f64, a2: f64, a3: f64, out: *mut *mut MountPlant) -> MountStatus {
    guard(|| {
        if out.is_null() {
            return fail(MountStatus::NullPointer, "out is null");
        }
        match PlantParams::balanced(a1, a2, a3) {
            Ok(p) => emit(out, MountPlant(p)),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `plant` must be NULL or a handle from `mount_plant_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mount_plant_free(plant: *mut MountPlant) {
    if !plant.is_null() {
        drop(Box::from_raw(plant));
    }
}

/// Creates the default fuzzy controller.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mount_fuzzy_default(out: *mut *mut MountFuzzy) -> MountStatus {
    guard(|| {
        if out.is_null() {
            return fail(MountStatus::NullPointer, "out is null");
        }
        emit(out, MountFuzzy(FuzzyController::default()))
    })
}

/// Parses a fuzzy definition in the text format written by `mountctl`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mount_fuzzy_from_text(text: *const c_char, out: *mut *mut MountFuzzy) -> MountStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(MountStatus::NullPointer, "text or out is null");
        }
        let Ok(s) = CStr::from_ptr(text).to_str() else {
            return fail(MountStatus::InvalidArgument, "text is not valid UTF-8");
        };
        match FuzzyController::from_text(s) {
            Ok(f) => emit(out, MountFuzzy(f)),
            Err(e) => from_error(e),
        }
    })
}

/// Serializes a fuzzy definition. Free the result with `mount_string_free`.
///
/// # Safety
/// `fuzzy` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mount_fuzzy_to_text(fuzzy: *const MountFuzzy, out: *mut *mut c_char) -> MountStatus {
    guard(|| {
        if fuzzy.is_null() || out.is_null() {
            return fail(MountStatus::NullPointer, "fuzzy or out is null");
        }
        let text = (*fuzzy).0.to_text();
        *out = CString::new(text).expect("definitions contain no NUL").into_raw();
        MountStatus::Ok
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mount_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Commanded acceleration for position error `e` and error rate `e_dot`.
///
/// # Safety
/// `fuzzy` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mount_fuzzy_output(fuzzy: *const MountFuzzy, e: f64, e_dot: f64, out: *mut f64) -> MountStatus {
    guard(|| {
        if fuzzy.is_null() || out.is_null() {
            return fail(MountStatus::NullPointer, "fuzzy or out is null");
        }
        if !(e.is_finite() && e_dot.is_finite()) {
            return fail(MountStatus::InvalidArgument, "inputs must be finite");
        }
        *out = (*fuzzy).0.output(e, e_dot);
        MountStatus::Ok
    })
}

/// # Safety
/// `fuzzy` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mount_fuzzy_free(fuzzy: *mut MountFuzzy) {
    if !fuzzy.is_null() {
        drop(Box::from_raw(fuzzy));
    }
}

/// Default experiment: 1 ms steps for 3 s towards 60° and 50°.
#[no_mangle]
pub extern "C" fn mount_sim_config_default() -> MountSimConfig {
    let d = SimConfig::default();
    MountSimConfig {
        step_size: d.step_size,
        duration: d.duration,
        theta_desired: [d.theta_desired[0], d.theta_desired[1]],
    }
}

unsafe fn run(
    plant: *const MountPlant,
    controller: &Controller,
    cfg: *const MountSimConfig,
    out: *mut *mut MountTrace,
) -> MountStatus {
    let c = &*cfg;
    let sim = SimConfig {
        step_size: c.step_size,
        duration: c.duration,
        theta_desired: Vec2::new(c.theta_desired[0], c.theta_desired[1]),
        ..SimConfig::default()
    };
    match simulate(&(*plant).0, controller, &sim) {
        Ok(trace) => emit(
            out,
            MountTrace {
                trace,
                reference: sim.reference(),
            },
        ),
        Err(e) => from_error(e),
    }
}

/// Simulates the computed-torque PD loop.
///
/// # Safety
/// `plant` must be a live handle, `kp` and `kd` must each point to two
/// doubles, `cfg` to a config and `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mount_simulate_pd(
    plant: *const MountPlant,
    kp: *const f64,
    kd: *const f64,
    cfg: *const MountSimConfig,
    out: *mut *mut MountTrace,
) -> MountStatus {
    guard(|| {
        if plant.is_null() || kp.is_null() || kd.is_null() || cfg.is_null() || out.is_null() {
            return fail(MountStatus::NullPointer, "null argument");
        }
        let (p, d) = (std::slice::from_raw_parts(kp, 2), std::slice::from_raw_parts(kd, 2));
        match PdGains::new(Vec2::new(p[0], p[1]), Vec2::new(d[0], d[1])) {
            Ok(g) => run(plant, &Controller::Pd(g), cfg, out),
            Err(e) => from_error(e),
        }
    })
}

/// Simulates the computed-torque fuzzy loop.
///
/// # Safety
/// All pointers must be valid; `out` receives a new trace handle.
#[no_mangle]
pub unsafe extern "C" fn mount_simulate_fuzzy(
    plant: *const MountPlant,
    fuzzy: *const MountFuzzy,
    cfg: *const MountSimConfig,
    out: *mut *mut MountTrace,
) -> MountStatus {
    guard(|| {
        if plant.is_null() || fuzzy.is_null() || cfg.is_null() || out.is_null() {
            return fail(MountStatus::NullPointer, "null argument");
        }
        run(plant, &Controller::Flc((*fuzzy).0.clone()), cfg, out)
    })
}

/// Number of rows in a trace; 0 for NULL.
///
/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mount_trace_len(trace: *const MountTrace) -> usize {
    if trace.is_null() {
        0
    } else {
        (*trace).trace.len()
    }
}

/// Copies row `k` into `row`, which must hold `MOUNT_TRACE_COLUMNS` doubles.
///
/// # Safety
/// `trace` must be a live handle and `row` valid for that many writes.
#[no_mangle]
pub unsafe extern "C" fn mount_trace_row(trace: *const MountTrace, k: usize, row: *mut f64) -> MountStatus {
    guard(|| {
        if trace.is_null() || row.is_null() {
            return fail(MountStatus::NullPointer, "trace or row is null");
        }
        let t = &(*trace).trace;
        if k >= t.len() {
            return fail(MountStatus::OutOfRange, format!("row {k} of {}", t.len()));
        }
        let s = t.states[k];
        let values = [
            t.times[k],
            s.theta[0],
            s.theta[1],
            s.theta_dot[0],
            s.theta_dot[1],
            t.torques[k][0],
            t.torques[k][1],
            t.errors[k][0],
            t.errors[k][1],
        ];
        std::slice::from_raw_parts_mut(row, MOUNT_TRACE_COLUMNS).copy_from_slice(&values);
        MountStatus::Ok
    })
}

/// Step metrics of a trace against the set-point it was run with.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mount_trace_metrics(trace: *const MountTrace, out: *mut MountMetrics) -> MountStatus {
    guard(|| {
        if trace.is_null() || out.is_null() {
            return fail(MountStatus::NullPointer, "trace or out is null");
        }
        let m = analyze(&(*trace).trace, &(*trace).reference);
        let nan = |v: [Option<f64>; 2]| v.map(|x| x.unwrap_or(f64::NAN));
        *out = MountMetrics {
            rise_time: nan(m.rise_time),
            settling_time: nan(m.settling_time),
            overshoot_pct: nan(m.overshoot_pct),
            itae: m.itae_value,
        };
        MountStatus::Ok
    })
}

/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mount_trace_free(trace: *mut MountTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Diverged { step: 3 }), MountStatus::Diverged);
        assert_eq!(status_of(&Error::Config("x".into())), MountStatus::InvalidArgument);
        assert_eq!(
            status_of(&Error::Parse {
                line: 1,
                msg: String::new()
            }),
            MountStatus::Parse
        );
    }

    #[test]
    fn error_message_is_kept() {
        assert_eq!(fail(MountStatus::InvalidArgument, "bad\0thing"), MountStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(mount_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "bad thing");
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), MountStatus::Panic);
    }
}
