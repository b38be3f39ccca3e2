//! Scenario engine, steady states, response metrics and calibration.

mod calibrate;
pub mod experiments;
mod metrics;
mod run;
mod scenario;

pub use calibrate::{
    calibrate, calibrate_with, residual, CalParam, CalTarget, CalibrationOptions, CalibrationResult,
};
pub use metrics::{response_metrics, series_metrics, settling_band, ResponseMetrics};
pub use run::{
    cooldown, run_closed_loop, run_closed_loop_full, run_open_loop, steady_state,
    steady_state_from, Cooldown, SteadyState, STEADY_BUDGET, STEADY_CYCLES, STEADY_SLOPE,
};
pub use scenario::{InitialState, Profile, Scenario, Trace, TraceRow};
