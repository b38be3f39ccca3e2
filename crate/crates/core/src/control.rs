//! Discrete PI controller, first-order set-point filter, and the 1-DOF /
//! 2-DOF loops built from them.
//!
//! The manipulated variable is the drive-current amplitude. Raising it
//! lowers the cold-tip temperature, so the loop error is `pv - setpoint`:
//! a tip that is too warm asks for more current.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIConfig {
    /// Proportional gain, A/K.
    pub k_p: f64,
    /// Integral gain, A/(K·s).
    pub k_i: f64,
    /// Sample period, s.
    pub ts: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// Conditional integration while saturated.
    pub anti_windup: bool,
}

impl Default for PIConfig {
    fn default() -> Self {
        Self {
            k_p: 7.5,
            k_i: 0.3,
            ts: 3.6,
            u_min: 0.0,
            u_max: 2.0,
            anti_windup: true,
        }
    }
}

impl PIConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_p >= 0.0 && self.k_p.is_finite()) {
            return Err(Error::invalid("k_p", "proportional gain must be >= 0"));
        }
        if !(self.k_i >= 0.0 && self.k_i.is_finite()) {
            return Err(Error::invalid("k_i", "integral gain must be >= 0"));
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::invalid("ts", "sample period must be > 0"));
        }
        if !(self.u_min < self.u_max) {
            return Err(Error::invalid("u_max", "u_min must be below u_max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PIState {
    pub integ: f64,
    pub u_last: f64,
}

impl PIState {
    /// State that outputs `u` for zero error, for bumpless starts.
    pub fn holding(u: f64) -> Self {
        Self {
            integ: u,
            u_last: u,
        }
    }
}

/// Positional PI: the integral is advanced first, then u = K_p·e + integ.
///
/// With anti-windup on, the integral step is dropped whenever taking it
/// would push the output past a limit in the direction the error is
/// already pushing.
pub fn pi_step(ps: PIState, cfg: &PIConfig, e: f64) -> (PIState, f64) {
    let mut integ = ps.integ + cfg.k_i * cfg.ts * e;
    let raw = cfg.k_p * e + integ;
    if cfg.anti_windup && ((raw > cfg.u_max && e > 0.0) || (raw < cfg.u_min && e < 0.0)) {
        integ = ps.integ;
    }
    let u = (cfg.k_p * e + integ).clamp(cfg.u_min, cfg.u_max);
    (PIState { integ, u_last: u }, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub a: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { a: 0.98 }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a < 1.0) {
            return Err(Error::invalid("a", "filter coefficient must lie in [0,1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterState {
    pub y_prev: f64,
    pub initialized: bool,
}

/// y[n] = a·y[n−1] + (1−a)·x[n]. The first sample seeds the filter.
pub fn filter_step(fs: FilterState, cfg: &FilterConfig, x: f64) -> (FilterState, f64) {
    let y = if fs.initialized {
        // same as a·y + (1−a)·x, but cannot round past either end
        x + cfg.a * (fs.y_prev - x)
    } else {
        x
    };
    (
        FilterState {
            y_prev: y,
            initialized: true,
        },
        y,
    )
}

/// Continuous time constant whose sampled step response gives coefficient `a`.
pub fn filter_time_constant(a: f64, ts: f64) -> Result<f64> {
    if !(ts > 0.0) {
        return Err(Error::Domain(format!(
            "sample period must be > 0, got {ts}"
        )));
    }
    if !(0.0..1.0).contains(&a) {
        return Err(Error::Domain(format!(
            "filter coefficient must lie in [0,1), got {a}"
        )));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(-ts / a.ln())
}

/// Default controller units per kelvin.
pub const DEFAULT_ERROR_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopMode {
    OneDof,
    TwoDof,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub mode: LoopMode,
    pub pi: PIConfig,
    /// Ignored in 1-DOF mode.
    pub filter: FilterConfig,
    /// Controller units per kelvin of error; the gains act on the scaled error.
    pub error_scale: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            mode: LoopMode::OneDof,
            pi: PIConfig::default(),
            filter: FilterConfig::default(),
            error_scale: DEFAULT_ERROR_SCALE,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        self.pi.validate()?;
        if !(self.error_scale > 0.0 && self.error_scale.is_finite()) {
            return Err(Error::invalid("error_scale", "must be finite and > 0"));
        }
        self.filter.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LoopState {
    pub pi: PIState,
    pub filter: FilterState,
}

/// One controller tick. Returns the new state, the current command, and the
/// set-point actually fed to the PI (the raw one in 1-DOF mode).
pub fn control_step(ls: LoopState, cfg: &LoopConfig, sp: f64, pv: f64) -> (LoopState, f64, f64) {
    let (filter, sp_f) = match cfg.mode {
        LoopMode::OneDof => (ls.filter, sp),
        LoopMode::TwoDof => filter_step(ls.filter, &cfg.filter, sp),
    };
    let (pi, u) = pi_step(ls.pi, &cfg.pi, cfg.error_scale * (pv - sp_f));
    (LoopState { pi, filter }, u, sp_f)
}
