use serde::{Deserialize, Serialize};

use super::scenario::{InitialState, Scenario, Trace, TraceRow};
use crate::control::{control_step, LoopConfig, LoopState, PIState};
use crate::error::{Error, Result};
use crate::plant::{cycle_step, CoolerParams, CoolerState, TelemetrySample};

/// Per-cycle change in T_E below which a cycle counts as settled, K.
pub const STEADY_SLOPE: f64 = 1e-6;
/// Consecutive settled cycles required.
pub const STEADY_CYCLES: u32 = 100;
/// Default cycle budget for steady-state searches (4 h of drive at 50 Hz).
pub const STEADY_BUDGET: u64 = 720_000;

fn fault(t: f64) -> impl FnOnce(Error) -> Error {
    move |e| Error::Fault {
        t,
        source: Box::new(e),
    }
}

fn cycles_in(span: f64, p: &CoolerParams) -> u64 {
    ((span * p.f_drive).round() as u64).max(1)
}

fn initial_state(p: &CoolerParams, sc: &Scenario) -> Result<CoolerState> {
    let mut s = match &sc.initial {
        InitialState::Ambient => CoolerState::ambient(p)?,
        InitialState::Steady { i_amp } => steady_state(p, *i_amp, sc.load_profile.at(0.0))?.state,
        InitialState::State(s) => **s,
    };
    s.t = 0.0;
    Ok(s)
}

enum Drive<'a> {
    Open,
    Closed(&'a LoopConfig),
}

fn run(p: &CoolerParams, sc: &Scenario, drive: Drive) -> Result<(Trace, CoolerState)> {
    p.validate()?;
    sc.validate()?;
    let per_sample = cycles_in(sc.sample_period, p);
    let n_samples = (sc.duration / sc.sample_period + 1e-9).floor() as u64;
    let period = 1.0 / p.f_drive;

    let mut state = initial_state(p, sc)?;
    let mut ls = LoopState {
        pi: PIState::holding(sc.initial_current),
        ..LoopState::default()
    };
    let (per_tick, sp_profile) = match drive {
        Drive::Closed(cfg) => {
            cfg.validate()?;
            let sp = sc.sp_profile.as_ref().ok_or_else(|| {
                Error::invalid("setpoint", "closed-loop run needs a set-point profile")
            })?;
            (cycles_in(cfg.pi.ts, p), Some(sp))
        }
        Drive::Open => {
            if sc.current_profile.is_none() {
                return Err(Error::invalid(
                    "current",
                    "open-loop run needs a current profile",
                ));
            }
            (0, None)
        }
    };

    let mut u = sc.initial_current;
    let (mut sp, mut sp_f) = (f64::NAN, f64::NAN);
    let mut q_ab = sc.load_profile.at(0.0);
    let mut tel = TelemetrySample::default();
    let mut rows = Vec::with_capacity(n_samples as usize + 1);
    let row = |t: f64, s: &CoolerState, tel: &TelemetrySample, sp, sp_f, u, q_ab| TraceRow {
        t,
        t_e: s.t_e(),
        t_c: s.t_c(),
        sp,
        filtered_sp: sp_f,
        u,
        q_ab,
        x_amp: tel.x_amp,
        p_comp: s.comp.p,
    };
    if let (Drive::Closed(_), Some(prof)) = (&drive, sp_profile) {
        sp = prof.at(0.0);
        sp_f = sp;
    } else if let Some(c) = &sc.current_profile {
        u = c.at(0.0);
    }
    rows.push(row(0.0, &state, &tel, sp, sp_f, u, q_ab));

    for c in 0..n_samples * per_sample {
        let t = c as f64 * period;
        match &drive {
            Drive::Closed(cfg) => {
                if c % per_tick == 0 {
                    sp = sp_profile.map_or(f64::NAN, |prof| prof.at(t));
                    let (next, cmd, f) = control_step(ls, cfg, sp, state.t_e());
                    ls = next;
                    u = cmd;
                    sp_f = f;
                }
            }
            Drive::Open => {
                u = sc.current_profile.as_ref().map_or(0.0, |prof| prof.at(t));
            }
        }
        q_ab = sc.load_profile.at(t);
        let (next, sample) = cycle_step(&state, u, q_ab, p).map_err(fault(t))?;
        state = next;
        tel = sample;
        if (c + 1) % per_sample == 0 {
            let k = (c + 1) / per_sample;
            let t_row = (k * per_sample) as f64 * period;
            rows.push(row(t_row, &state, &tel, sp, sp_f, u, q_ab));
        }
    }
    Ok((Trace { rows }, state))
}

/// Drives the plant with the scenario's current profile.
pub fn run_open_loop(p: &CoolerParams, sc: &Scenario) -> Result<Trace> {
    run(p, sc, Drive::Open).map(|(tr, _)| tr)
}

/// Closes the loop on end-of-cycle T_E; the controller runs every `Ts` and
/// its command is held in between.
pub fn run_closed_loop(p: &CoolerParams, cfg: &LoopConfig, sc: &Scenario) -> Result<Trace> {
    run(p, sc, Drive::Closed(cfg)).map(|(tr, _)| tr)
}

/// [`run_closed_loop`] that also hands back the final plant state.
pub fn run_closed_loop_full(
    p: &CoolerParams,
    cfg: &LoopConfig,
    sc: &Scenario,
) -> Result<(Trace, CoolerState)> {
    run(p, sc, Drive::Closed(cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub t_e: f64,
    pub t_c: f64,
    pub cycles: u64,
    pub state: CoolerState,
    /// Telemetry of the final cycle.
    pub last: TelemetrySample,
}

/// Cycles from ambient until T_E stops moving.
pub fn steady_state(p: &CoolerParams, i_amp: f64, qdot_ab: f64) -> Result<SteadyState> {
    steady_state_from(p, &CoolerState::ambient(p)?, i_amp, qdot_ab, STEADY_BUDGET)
}

/// Like [`steady_state`] but starting from `init`, which is much cheaper when
/// `init` is already close.
pub fn steady_state_from(
    p: &CoolerParams,
    init: &CoolerState,
    i_amp: f64,
    qdot_ab: f64,
    budget: u64,
) -> Result<SteadyState> {
    settle(p, init, i_amp, qdot_ab, budget, |_, _, _| {})
}

fn settle(
    p: &CoolerParams,
    init: &CoolerState,
    i_amp: f64,
    qdot_ab: f64,
    budget: u64,
    mut on_cycle: impl FnMut(u64, &CoolerState, &TelemetrySample),
) -> Result<SteadyState> {
    p.validate()?;
    let mut state = *init;
    let mut quiet = 0;
    let mut slope = f64::INFINITY;
    for cycle in 1..=budget {
        let (next, tel) = cycle_step(&state, i_amp, qdot_ab, p).map_err(fault(state.t))?;
        slope = next.t_e() - state.t_e();
        state = next;
        on_cycle(cycle, &state, &tel);
        quiet = if slope.abs() < STEADY_SLOPE {
            quiet + 1
        } else {
            0
        };
        if quiet >= STEADY_CYCLES {
            return Ok(SteadyState {
                t_e: state.t_e(),
                t_c: state.t_c(),
                cycles: cycle,
                state,
                last: tel,
            });
        }
    }
    Err(Error::NonConvergence {
        cycles: budget,
        last_slope: slope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cooldown {
    pub trace: Trace,
    /// Time after which T_E stays within 1 K of its final value, s.
    pub cooldown_time: f64,
    pub final_t_e: f64,
    pub i_amp: f64,
}

/// Start-up from ambient at a given electrical input power, sampled at 1 s.
pub fn cooldown(p: &CoolerParams, input_power: f64) -> Result<Cooldown> {
    if !(input_power >= 0.0 && input_power.is_finite()) {
        return Err(Error::Domain(format!(
            "input power must be >= 0, got {input_power}"
        )));
    }
    let i_amp = p.current_for_power(input_power);
    let init = CoolerState::ambient(p)?;
    let per_sample = cycles_in(1.0, p);
    let first = TraceRow {
        t: 0.0,
        t_e: init.t_e(),
        t_c: init.t_c(),
        sp: f64::NAN,
        filtered_sp: f64::NAN,
        u: i_amp,
        q_ab: 0.0,
        x_amp: 0.0,
        p_comp: init.comp.p,
    };
    let mut rows = vec![first];
    if i_amp == 0.0 {
        return Ok(Cooldown {
            trace: Trace { rows },
            cooldown_time: 0.0,
            final_t_e: init.t_e(),
            i_amp,
        });
    }
    let ss = settle(p, &init, i_amp, 0.0, STEADY_BUDGET, |cycle, s, tel| {
        if cycle % per_sample == 0 {
            rows.push(TraceRow {
                t: cycle as f64 / p.f_drive,
                t_e: s.t_e(),
                t_c: s.t_c(),
                x_amp: tel.x_amp,
                p_comp: s.comp.p,
                ..first
            });
        }
    })?;
    let outside = rows.iter().rposition(|r| (r.t_e - ss.t_e).abs() > 1.0);
    let cooldown_time = match outside {
        Some(k) if k + 1 < rows.len() => rows[k + 1].t,
        Some(_) => ss.cycles as f64 / p.f_drive,
        None => 0.0,
    };
    Ok(Cooldown {
        trace: Trace { rows },
        cooldown_time,
        final_t_e: ss.t_e,
        i_amp,
    })
}
