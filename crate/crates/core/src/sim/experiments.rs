//! The canned experiments behind the CLI subcommands: open-loop current
//! steps and load pulses, start-up cool-down, and the controller comparison.

use serde::{Deserialize, Serialize};

use super::metrics::{response_metrics, settling_band, ResponseMetrics};
use super::run::{run_closed_loop, run_closed_loop_full, run_open_loop, steady_state};
use super::scenario::{InitialState, Profile, Scenario, Trace};
use crate::control::{FilterConfig, LoopConfig, LoopMode, PIConfig};
use crate::error::Result;
use crate::plant::CoolerParams;

/// Drive amplitudes of the open-loop current-step runs, A.
pub const STEP_CURRENTS: [f64; 4] = [1.48, 1.55, 1.69, 1.83];
/// Drive amplitude holding the load-pulse baseline, A.
pub const PULSE_CURRENT: f64 = 1.83;
/// Applied loads of the pulse runs, W.
pub const PULSE_LOADS: [f64; 3] = [0.1188, 0.2205, 0.33];
/// Pulse width shared by the open- and closed-loop load disturbances, s.
pub const PULSE_WIDTH: f64 = 45.0;
/// Electrical input of the start-up run, W.
pub const COOLDOWN_POWER: f64 = 7.27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub i_amp: f64,
    pub t_e: f64,
    pub t_c: f64,
    pub cycles: u64,
}

/// Steady cold-tip temperature at each drive amplitude, each from ambient.
pub fn current_sweep(p: &CoolerParams, currents: &[f64]) -> Result<Vec<SweepPoint>> {
    currents
        .iter()
        .map(|&i| {
            let ss = steady_state(p, i, 0.0)?;
            Ok(SweepPoint {
                i_amp: i,
                t_e: ss.t_e,
                t_c: ss.t_c,
                cycles: ss.cycles,
            })
        })
        .collect()
}

/// Open-loop trace stepping through `currents` every `dwell` seconds,
/// starting from the steady state of the first one.
pub fn current_steps(
    p: &CoolerParams,
    currents: &[f64],
    dwell: f64,
    sample_period: f64,
) -> Result<Trace> {
    let first = currents.first().copied().unwrap_or(0.0);
    let start = steady_state(p, first, 0.0)?;
    let points = currents
        .iter()
        .enumerate()
        .map(|(k, &i)| (k as f64 * dwell, i))
        .collect();
    let sc = Scenario {
        duration: dwell * currents.len().max(1) as f64,
        sample_period,
        current_profile: Some(Profile::new(points)?),
        initial: InitialState::State(Box::new(start.state)),
        ..Scenario::default()
    };
    run_open_loop(p, &sc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseResponse {
    pub load: f64,
    /// Steady T_E before the pulse, K.
    pub baseline: f64,
    /// Highest T_E reached, K.
    pub peak: f64,
    /// Time of the peak after pulse onset, s.
    pub peak_time: f64,
    /// T_E at the end of the run, K.
    pub final_t_e: f64,
    pub trace: Trace,
}

/// Load pulses of `width` seconds applied at `onset` on top of the steady
/// state at `i_amp`, each run for `duration` seconds.
pub fn load_pulses(
    p: &CoolerParams,
    i_amp: f64,
    loads: &[f64],
    onset: f64,
    width: f64,
    duration: f64,
) -> Result<Vec<PulseResponse>> {
    let base = steady_state(p, i_amp, 0.0)?;
    loads
        .iter()
        .map(|&q| {
            let sc = Scenario {
                duration,
                sample_period: 1.0,
                current_profile: Some(Profile::constant(i_amp)),
                load_profile: Profile::new(vec![(0.0, 0.0), (onset, q), (onset + width, 0.0)])?,
                initial: InitialState::State(Box::new(base.state)),
                ..Scenario::default()
            };
            let trace = run_open_loop(p, &sc)?;
            let (peak_row, peak) =
                trace
                    .rows
                    .iter()
                    .map(|r| (r.t, r.t_e))
                    .fold(
                        (0.0, f64::NEG_INFINITY),
                        |a, b| if b.1 > a.1 { b } else { a },
                    );
            Ok(PulseResponse {
                load: q,
                baseline: base.t_e,
                peak,
                peak_time: peak_row - onset,
                final_t_e: trace.last().map_or(base.t_e, |r| r.t_e),
                trace,
            })
        })
        .collect()
}

/// Shape of the controller comparison: a set-point step followed, once the
/// loop has settled, by a load pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerExperiment {
    /// Set-point held before the step, K.
    pub sp_start: f64,
    /// Set-point after the step, K.
    pub sp_end: f64,
    pub step_time: f64,
    pub pulse_time: f64,
    pub pulse_width: f64,
    /// W.
    pub pulse_load: f64,
    pub duration: f64,
    pub sample_period: f64,
    /// Closed-loop lead-in used to park the plant at `sp_start`, s.
    pub lead_in: f64,
}

impl Default for ControllerExperiment {
    fn default() -> Self {
        Self {
            sp_start: 170.0,
            sp_end: 151.0,
            step_time: 60.0,
            pulse_time: 1560.0,
            pulse_width: PULSE_WIDTH,
            pulse_load: 0.5,
            duration: 2400.0,
            sample_period: 1.0,
            lead_in: 3600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerCase {
    pub name: String,
    pub config: LoopConfig,
}

/// 1-DOF at K_p = 7.5 and 15, and 2-DOF at K_p = 10 with a = 0.98, all with
/// K_i = 0.3.
pub fn standard_cases() -> Vec<ControllerCase> {
    let pi = |k_p| PIConfig {
        k_p,
        ..PIConfig::default()
    };
    vec![
        ControllerCase {
            name: "1dof-kp7.5".into(),
            config: LoopConfig {
                mode: LoopMode::OneDof,
                pi: pi(7.5),
                ..LoopConfig::default()
            },
        },
        ControllerCase {
            name: "1dof-kp15".into(),
            config: LoopConfig {
                mode: LoopMode::OneDof,
                pi: pi(15.0),
                ..LoopConfig::default()
            },
        },
        ControllerCase {
            name: "2dof-kp10".into(),
            config: LoopConfig {
                mode: LoopMode::TwoDof,
                pi: pi(10.0),
                filter: FilterConfig { a: 0.98 },
                ..LoopConfig::default()
            },
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub config: LoopConfig,
    pub setpoint: ResponseMetrics,
    pub disturbance: ResponseMetrics,
    pub trace: Trace,
}

/// Parks the plant at `sp_start` under a plain 1-DOF loop so every case
/// starts from the same state and current.
pub fn park(p: &CoolerParams, exp: &ControllerExperiment) -> Result<Scenario> {
    let sc = Scenario {
        duration: exp.lead_in,
        sample_period: exp.sample_period,
        sp_profile: Some(Profile::constant(exp.sp_start)),
        ..Scenario::default()
    };
    let (lead, mut state) = run_closed_loop_full(p, &LoopConfig::default(), &sc)?;
    state.t = 0.0;
    let u = lead.last().map_or(0.0, |r| r.u);
    Ok(Scenario {
        duration: exp.duration,
        sample_period: exp.sample_period,
        sp_profile: Some(Profile::new(vec![
            (0.0, exp.sp_start),
            (exp.step_time, exp.sp_end),
        ])?),
        load_profile: Profile::new(vec![
            (0.0, 0.0),
            (exp.pulse_time, exp.pulse_load),
            (exp.pulse_time + exp.pulse_width, 0.0),
        ])?,
        current_profile: None,
        initial: InitialState::State(Box::new(state)),
        initial_current: u,
    })
}

pub fn run_case(
    p: &CoolerParams,
    exp: &ControllerExperiment,
    parked: &Scenario,
    case: &ControllerCase,
) -> Result<CaseResult> {
    let trace = run_closed_loop(p, &case.config, parked)?;
    let step = exp.sp_end - exp.sp_start;
    let setpoint = response_metrics(
        &trace.window(0.0, exp.pulse_time),
        exp.step_time,
        exp.sp_start,
        exp.sp_end,
        settling_band(step),
    )?;
    let disturbance = response_metrics(
        &trace,
        exp.pulse_time,
        exp.sp_end,
        exp.sp_end,
        settling_band(0.0),
    )?;
    Ok(CaseResult {
        name: case.name.clone(),
        config: case.config,
        setpoint,
        disturbance,
        trace,
    })
}

/// Runs every case from one shared parked state.
pub fn compare_controllers(
    p: &CoolerParams,
    exp: &ControllerExperiment,
    cases: &[ControllerCase],
) -> Result<Vec<CaseResult>> {
    let parked = park(p, exp)?;
    cases.iter().map(|c| run_case(p, exp, &parked, c)).collect()
}
