//! C ABI over the cryocooler simulator.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`CryoStatus`]; the message behind the most
//! recent failure on the calling thread is available from
//! [`cryo_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cryosim::control::{
    control_step, filter_time_constant, FilterConfig, LoopConfig, LoopMode, LoopState, PIConfig,
    PIState,
};
use cryosim::plant::{cycle_step, CoolerParams, CoolerState, TelemetrySample};
use cryosim::sim::steady_state;
use cryosim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CryoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PlantFault = 3,
    CalibrationFailed = 4,
    NonConvergence = 5,
    Panic = 6,
}

impl From<&Error> for CryoStatus {
    fn from(e: &Error) -> Self {
        match e.root() {
            Error::Domain(_) | Error::Invalid { .. } | Error::Parse { .. } | Error::Io { .. } => {
                CryoStatus::InvalidArgument
            }
            Error::CalibrationFailed { .. } => CryoStatus::CalibrationFailed,
            Error::NonConvergence { .. } => CryoStatus::NonConvergence,
            _ => CryoStatus::PlantFault,
        }
    }
}

/// Plant parameters.
pub struct CryoParams(CoolerParams);

/// A running plant: state plus the parameters it was created with.
pub struct CryoPlant {
    params: CoolerParams,
    state: CoolerState,
}

/// A PI loop (1-DOF or 2-DOF) with its memory.
pub struct CryoController {
    config: LoopConfig,
    state: LoopState,
}

/// End-of-cycle telemetry; energies are per-cycle totals in J.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CryoSample {
    pub t: f64,
    pub t_e: f64,
    pub t_c: f64,
    pub p_comp: f64,
    pub x: f64,
    pub x_amp: f64,
    pub w_comp: f64,
    pub w_exp: f64,
    pub q_rej: f64,
    pub q_bl: f64,
    pub q_ab: f64,
}

impl From<TelemetrySample> for CryoSample {
    fn from(s: TelemetrySample) -> Self {
        Self {
            t: s.t,
            t_e: s.t_e,
            t_c: s.t_c,
            p_comp: s.p_comp,
            x: s.x,
            x_amp: s.x_amp,
            w_comp: s.w_comp,
            w_exp: s.w_exp,
            q_rej: s.q_rej,
            q_bl: s.q_bl,
            q_ab: s.q_ab,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: CryoStatus, msg: &str) -> CryoStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), CryoStatus>) -> CryoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CryoStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CryoStatus::Panic, "internal panic"),
    }
}

fn check(r: cryosim::Result<()>) -> Result<(), CryoStatus> {
    r.map_err(|e| fail(CryoStatus::from(&e), &e.to_string()))
}

fn null() -> CryoStatus {
    fail(CryoStatus::NullPointer, "null pointer argument")
}

/// Message describing the last failure on this thread. Valid until the next
/// call into this library from the same thread; never NULL.
#[no_mangle]
pub extern "C" fn cryo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// New parameter set holding the defaults. Free with [`cryo_params_free`].
#[no_mangle]
pub extern "C" fn cryo_params_new() -> *mut CryoParams {
    Box::into_raw(Box::new(CryoParams(CoolerParams::default())))
}

/// # Safety
/// `p` is NULL or a handle from [`cryo_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cryo_params_free(p: *mut CryoParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn key_str<'a>(key: *const c_char) -> Result<&'a str, CryoStatus> {
    if key.is_null() {
        return Err(null());
    }
    CStr::from_ptr(key)
        .to_str()
        .map_err(|_| fail(CryoStatus::InvalidArgument, "key is not valid UTF-8"))
}

/// Sets a parameter by its config-file name (`k_m`, `ua_rej`, ...). The
/// whole set is validated afterwards and left unchanged on failure.
///
/// # Safety
/// `p` is a live handle; `key` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cryo_params_set(
    p: *mut CryoParams,
    key: *const c_char,
    value: f64,
) -> CryoStatus {
    guard(|| {
        let p = p.as_mut().ok_or_else(null)?;
        let key = key_str(key)?;
        let mut next = p.0;
        check(next.set(key, value))?;
        check(next.validate())?;
        p.0 = next;
        Ok(())
    })
}

/// # Safety
/// `p` is a live handle; `key` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cryo_params_get(
    p: *const CryoParams,
    key: *const c_char,
    out: *mut f64,
) -> CryoStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        let key = key_str(key)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = p.0.get(key).ok_or_else(|| {
            fail(
                CryoStatus::InvalidArgument,
                &format!("unknown parameter `{key}`"),
            )
        })?;
        Ok(())
    })
}

/// Runs from ambient at a fixed drive amplitude and load until T_E settles.
///
/// # Safety
/// `p` is a live handle; `t_e` and `t_c` are writable.
#[no_mangle]
pub unsafe extern "C" fn cryo_steady_state(
    p: *const CryoParams,
    i_amp: f64,
    q_ab: f64,
    t_e: *mut f64,
    t_c: *mut f64,
) -> CryoStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        let (t_e, t_c) = (
            t_e.as_mut().ok_or_else(null)?,
            t_c.as_mut().ok_or_else(null)?,
        );
        let ss = steady_state(&p.0, i_amp, q_ab)
            .map_err(|e| fail(CryoStatus::from(&e), &e.to_string()))?;
        *t_e = ss.t_e;
        *t_c = ss.t_c;
        Ok(())
    })
}

/// New plant at ambient equilibrium, copying the parameters. Free with
/// [`cryo_plant_free`].
///
/// # Safety
/// `p` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cryo_plant_new(
    p: *const CryoParams,
    out: *mut *mut CryoPlant,
) -> CryoStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let state =
            CoolerState::ambient(&p.0).map_err(|e| fail(CryoStatus::from(&e), &e.to_string()))?;
        *out = Box::into_raw(Box::new(CryoPlant { params: p.0, state }));
        Ok(())
    })
}

/// # Safety
/// `s` is NULL or a handle from [`cryo_plant_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cryo_plant_free(s: *mut CryoPlant) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Advances one drive period. On failure the plant keeps its previous state.
///
/// # Safety
/// `s` is a live handle; `sample` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cryo_plant_step(
    s: *mut CryoPlant,
    i_amp: f64,
    q_ab: f64,
    sample: *mut CryoSample,
) -> CryoStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(null)?;
        let (next, tel) = cycle_step(&s.state, i_amp, q_ab, &s.params)
            .map_err(|e| fail(CryoStatus::from(&e), &e.to_string()))?;
        s.state = next;
        if let Some(out) = sample.as_mut() {
            *out = tel.into();
        }
        Ok(())
    })
}

/// Current cold-tip temperature, or NaN for a NULL handle.
///
/// # Safety
/// `s` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cryo_plant_t_e(s: *const CryoPlant) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.state.t_e())
}

/// New PI loop. `two_dof` selects the set-point filter with coefficient `a`
/// (ignored otherwise). The integrator starts at `u0` for a bumpless start.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cryo_controller_new(
    two_dof: bool,
    k_p: f64,
    k_i: f64,
    ts: f64,
    u_min: f64,
    u_max: f64,
    a: f64,
    error_scale: f64,
    u0: f64,
    out: *mut *mut CryoController,
) -> CryoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(null)?;
        let config = LoopConfig {
            mode: if two_dof {
                LoopMode::TwoDof
            } else {
                LoopMode::OneDof
            },
            pi: PIConfig {
                k_p,
                k_i,
                ts,
                u_min,
                u_max,
                anti_windup: true,
            },
            filter: FilterConfig { a },
            error_scale,
        };
        check(config.validate())?;
        let state = LoopState {
            pi: PIState::holding(u0),
            ..LoopState::default()
        };
        *out = Box::into_raw(Box::new(CryoController { config, state }));
        Ok(())
    })
}

/// # Safety
/// `c` is NULL or a handle from [`cryo_controller_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cryo_controller_free(c: *mut CryoController) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// One controller tick on set-point `sp` and measurement `pv` (K). Writes
/// the drive amplitude command and the set-point seen by the PI.
///
/// # Safety
/// `c` is a live handle; `u` is writable; `sp_f` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cryo_controller_step(
    c: *mut CryoController,
    sp: f64,
    pv: f64,
    u: *mut f64,
    sp_f: *mut f64,
) -> CryoStatus {
    guard(|| {
        let c = c.as_mut().ok_or_else(null)?;
        let u = u.as_mut().ok_or_else(null)?;
        let (state, cmd, f) = control_step(c.state, &c.config, sp, pv);
        c.state = state;
        *u = cmd;
        if let Some(out) = sp_f.as_mut() {
            *out = f;
        }
        Ok(())
    })
}

/// τ_f = −Ts/ln(a) of the set-point filter.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cryo_filter_time_constant(a: f64, ts: f64, out: *mut f64) -> CryoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(null)?;
        *out =
            filter_time_constant(a, ts).map_err(|e| fail(CryoStatus::from(&e), &e.to_string()))?;
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cryo_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}
