//! C ABI for the solver: an opaque simulation handle, integer status
//! codes and a thread-local last-error message.
//!
//! Every function returns an [`HmhdStatus`]; on failure the message is
//! available from [`hmhd_last_error`] until the next failing call on the
//! same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hallmhd::harness::{run, AnyState, RunConfig, Stepper};
use hallmhd::sobolev::hs_norm;
use hallmhd::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HmhdStatus {
    Ok = 0,
    /// A run finished but one of its monitors failed.
    MonitorFailed = 1,
    Config = 2,
    Numeric = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    Io = 6,
    Format = 7,
    Argument = 8,
    Panic = 9,
}

/// Opaque simulation handle.
pub struct HmhdSim {
    stepper: Stepper,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HmhdStatus {
    match e {
        Error::Numeric { .. } | Error::Cfl { .. } => HmhdStatus::Numeric,
        Error::Io(_) => HmhdStatus::Io,
        Error::Format(_) => HmhdStatus::Format,
        Error::Argument(_) | Error::Shape(_) | Error::Domain(_) => HmhdStatus::Argument,
        Error::Config(_) | Error::Unknown(_) => HmhdStatus::Config,
    }
}

fn guard(f: impl FnOnce() -> Result<HmhdStatus, (HmhdStatus, String)>) -> HmhdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            HmhdStatus::Panic
        }
    }
}

fn lift(e: Error) -> (HmhdStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HmhdStatus, String)> {
    if p.is_null() {
        return Err((HmhdStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (HmhdStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn sim_ref<'a>(sim: *const HmhdSim) -> Result<&'a HmhdSim, (HmhdStatus, String)> {
    sim.as_ref().ok_or((HmhdStatus::NullPointer, "simulation handle is null".into()))
}

unsafe fn write_out(out: *mut f64, v: f64) -> Result<HmhdStatus, (HmhdStatus, String)> {
    if out.is_null() {
        return Err((HmhdStatus::NullPointer, "output pointer is null".into()));
    }
    *out = v;
    Ok(HmhdStatus::Ok)
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hmhd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a simulation from key-value configuration text and stores the
/// handle in `*out`. Release it with [`hmhd_sim_free`].
///
/// # Safety
/// `config` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hmhd_sim_new(config: *const c_char, out: *mut *mut HmhdSim) -> HmhdStatus {
    guard(|| {
        if out.is_null() {
            return Err((HmhdStatus::NullPointer, "output pointer is null".into()));
        }
        let cfg = RunConfig::from_text(text(config, "config")?).map_err(lift)?;
        let stepper = Stepper::new(&cfg).map_err(lift)?;
        *out = Box::into_raw(Box::new(HmhdSim { stepper }));
        Ok(HmhdStatus::Ok)
    })
}

/// Advances `steps` time steps. On a numeric failure the state is left at
/// the last good step.
///
/// # Safety
/// `sim` must come from [`hmhd_sim_new`] and not be freed.
#[no_mangle]
pub unsafe extern "C" fn hmhd_sim_step(sim: *mut HmhdSim, steps: u32) -> HmhdStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or((HmhdStatus::NullPointer, "simulation handle is null".to_string()))?;
        for _ in 0..steps {
            sim.stepper.advance().map_err(lift)?;
        }
        Ok(HmhdStatus::Ok)
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hmhd_sim_time(sim: *const HmhdSim, out: *mut f64) -> HmhdStatus {
    guard(|| write_out(out, sim_ref(sim)?.stepper.state().t()))
}

/// Kinetic plus magnetic energy ½(‖u‖² + ‖B‖²), mean-square normalized.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hmhd_sim_energy(sim: *const HmhdSim, out: *mut f64) -> HmhdStatus {
    guard(|| {
        let s = sim_ref(sim)?.stepper.state();
        write_out(out, 0.5 * (s.u().l2().powi(2) + s.b().l2().powi(2)))
    })
}

/// ‖u‖² + ‖B‖² + ‖u − εJ‖² in Ḣ^{1/2}.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hmhd_sim_triple_norm_sq(sim: *const HmhdSim, out: *mut f64) -> HmhdStatus {
    guard(|| {
        let h = sim_ref(sim)?;
        let eps = h.stepper.params.eps;
        let v = match h.stepper.state() {
            AnyState::D3(s) => s.electron_velocity(eps),
            AnyState::D25(s) => s.v(),
        };
        let s = h.stepper.state();
        let sq = |f| hs_norm(f, 0.5).map(|x| x * x).map_err(lift);
        write_out(out, sq(s.u())? + sq(s.b())? + sq(&v)?)
    })
}

/// # Safety
/// `sim` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hmhd_sim_write_snapshot(sim: *const HmhdSim, path: *const c_char) -> HmhdStatus {
    guard(|| {
        let h = sim_ref(sim)?;
        let p = text(path, "path")?;
        hallmhd::harness::snapshot_write(Path::new(p), &h.stepper.state().snapshot()).map_err(lift)?;
        Ok(HmhdStatus::Ok)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sim` must come from [`hmhd_sim_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hmhd_sim_free(sim: *mut HmhdSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs a full configuration, writing artifacts into its `out` directory.
/// Returns `MonitorFailed` when the run completes but a monitor fails.
///
/// # Safety
/// `config` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hmhd_run_config(config: *const c_char) -> HmhdStatus {
    guard(|| {
        let cfg = RunConfig::from_text(text(config, "config")?).map_err(lift)?;
        let o = run(&cfg).map_err(lift)?;
        Ok(if o.summary.passed { HmhdStatus::Ok } else { HmhdStatus::MonitorFailed })
    })
}
