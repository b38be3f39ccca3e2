//! Command-line front end. [`run`] takes the raw argument list and returns
//! the process exit status.

mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::{parse_config, Config};
pub use output::{sha256_hex, trace_csv, TRACE_HEADER};

use crate::control::{LoopConfig, LoopMode};
use crate::error::{Error, Result};
use crate::plant::CoolerParams;
use crate::sim::experiments::{self, ControllerCase, ControllerExperiment};
use crate::sim::{
    calibrate, response_metrics, run_closed_loop, run_open_loop, settling_band, steady_state,
    CalTarget, ResponseMetrics, Trace,
};

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "CRYOSIM_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PLANT_FAULT: i32 = 3;
pub const EXIT_CALIBRATION: i32 = 4;
pub const EXIT_NON_CONVERGENCE: i32 = 5;
/// Bad command line: unknown subcommand, missing or malformed flags.
pub const EXIT_USAGE: i32 = 64;

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Invalid { .. } | Error::Parse { .. } => EXIT_CONFIG,
        Error::Overtravel { .. } | Error::NonPhysicalTemperature { .. } | Error::Domain(_) => {
            EXIT_PLANT_FAULT
        }
        Error::CalibrationFailed { .. } => EXIT_CALIBRATION,
        Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        Error::Io { .. } => EXIT_IO,
        Error::Fault { .. } => unreachable!("root() strips fault wrappers"),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cryosim",
    version,
    about = "Stirling cryocooler cold-tip simulator with PI temperature control",
    arg_required_else_help = true
)]
struct Cli {
    /// Config file, usually holding the [plant] section.
    #[arg(long, global = true, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Config file, usually holding the [controller] and [scenario] sections.
    #[arg(long, global = true, value_name = "FILE")]
    scenario: Option<PathBuf>,
    /// Output directory (default: $CRYOSIM_OUT_DIR, else ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Accepted for scripting symmetry; runs are deterministic regardless.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Start-up from ambient at a fixed electrical input power.
    Cooldown {
        /// Input power, W.
        #[arg(long, default_value_t = experiments::COOLDOWN_POWER)]
        power: f64,
    },
    /// Steady cold-tip temperature per drive amplitude, plus a stepped trace.
    StepCurrent {
        /// Drive amplitudes, A.
        #[arg(long, value_delimiter = ',', default_values_t = experiments::STEP_CURRENTS)]
        currents: Vec<f64>,
        /// Time spent at each amplitude in the trace, s.
        #[arg(long, default_value_t = 2400.0)]
        dwell: f64,
    },
    /// Load pulses on top of a steady open-loop operating point.
    PulseLoad {
        /// Drive amplitude, A.
        #[arg(long, default_value_t = experiments::PULSE_CURRENT)]
        current: f64,
        /// Pulse heights, W.
        #[arg(long, value_delimiter = ',', default_values_t = experiments::PULSE_LOADS)]
        loads: Vec<f64>,
        /// Pulse width, s.
        #[arg(long, default_value_t = experiments::PULSE_WIDTH)]
        width: f64,
        /// Pulse onset, s.
        #[arg(long, default_value_t = 10.0)]
        onset: f64,
        /// Length of each run, s.
        #[arg(long, default_value_t = 400.0)]
        duration: f64,
    },
    /// Closed-loop run of the configured scenario and controller.
    ClosedLoop,
    /// Fit K_m and UA_rej (all five closure parameters with five or more
    /// targets) to steady cold-tip temperatures.
    Calibrate {
        /// Fit target `I_amp:Q_ab:T_E` (A, W, K); repeatable.
        #[arg(long = "target", value_name = "I:Q:T")]
        targets: Vec<String>,
        /// Held-out check `I_amp:T_E`, reported but not fitted; repeatable.
        #[arg(long = "check", value_name = "I:T")]
        checks: Vec<String>,
    },
    /// 1-DOF K_p=7.5, 1-DOF K_p=15 and 2-DOF K_p=10 on one set-point step
    /// and load pulse.
    CompareControllers,
}

const DEFAULT_TARGETS: [(f64, f64, f64); 1] = [(1.55, 0.0, 151.3)];
const DEFAULT_CHECKS: [(f64, f64); 3] = [(1.48, 159.1), (1.69, 144.7), (1.83, 139.5)];

#[derive(Serialize)]
struct Provenance {
    /// Arguments with the program name normalized and the output directory dropped.
    command_line: Vec<String>,
    config_hash: String,
    config: String,
    seedless: bool,
    version: &'static str,
}

#[derive(Serialize)]
struct Summary<'a, M: Serialize> {
    command: &'a str,
    metrics: M,
    params: &'a CoolerParams,
    controller: &'a LoopConfig,
    provenance: &'a Provenance,
}

struct Ctx {
    cfg: Config,
    out: PathBuf,
    provenance: Provenance,
}

impl Ctx {
    fn finish<M: Serialize>(
        &self,
        command: &str,
        params: &CoolerParams,
        metrics: M,
        trace: &Trace,
    ) -> Result<()> {
        output::write_trace(&self.out, "trace.csv", trace)?;
        let summary = Summary {
            command,
            metrics,
            params,
            controller: &self.cfg.controller,
            provenance: &self.provenance,
        };
        output::write_json(&self.out, "summary.json", &summary)
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status. Diagnostics go to stderr, result tables to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli, &args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("cryosim: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_config(params: Option<&Path>, scenario: Option<&Path>) -> Result<Config> {
    let mut cfg = Config::default();
    for path in [params, scenario].into_iter().flatten() {
        cfg.apply(&read(path)?).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{msg} ({})", path.display()),
            },
            other => other,
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn command_line(args: &[OsString]) -> Vec<String> {
    let mut out = vec!["cryosim".to_string()];
    let mut skip = false;
    for a in args.iter().skip(1) {
        let a = a.to_string_lossy();
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.into_owned());
        }
    }
    out
}

fn execute(cli: Cli, args: &[OsString]) -> Result<()> {
    let cfg = load_config(cli.params.as_deref(), cli.scenario.as_deref())?;
    let config_text = cfg.serialize()?;
    let out = cli
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    output::ensure_dir(&out)?;
    let ctx = Ctx {
        provenance: Provenance {
            command_line: command_line(args),
            config_hash: sha256_hex(config_text.as_bytes()),
            config: config_text,
            seedless: cli.seedless,
            version: env!("CARGO_PKG_VERSION"),
        },
        cfg,
        out,
    };

    match cli.command {
        Command::Cooldown { power } => cmd_cooldown(&ctx, power),
        Command::StepCurrent { currents, dwell } => cmd_step_current(&ctx, &currents, dwell),
        Command::PulseLoad {
            current,
            loads,
            width,
            onset,
            duration,
        } => cmd_pulse_load(&ctx, current, &loads, onset, width, duration),
        Command::ClosedLoop => cmd_closed_loop(&ctx),
        Command::Calibrate { targets, checks } => cmd_calibrate(&ctx, &targets, &checks),
        Command::CompareControllers => cmd_compare(&ctx),
    }
}

#[derive(Serialize)]
struct CooldownMetrics {
    input_power: f64,
    i_amp: f64,
    cooldown_time_s: f64,
    cooldown_time_min: f64,
    final_t_e: f64,
}

fn cmd_cooldown(ctx: &Ctx, power: f64) -> Result<()> {
    let p = &ctx.cfg.plant;
    let cd = crate::sim::cooldown(p, power)?;
    let m = CooldownMetrics {
        input_power: power,
        i_amp: cd.i_amp,
        cooldown_time_s: cd.cooldown_time,
        cooldown_time_min: cd.cooldown_time / 60.0,
        final_t_e: cd.final_t_e,
    };
    println!(
        "input {power} W -> {:.4} A: cool-down {:.1} min to {:.3} K",
        m.i_amp, m.cooldown_time_min, m.final_t_e
    );
    ctx.finish("cooldown", p, m, &cd.trace)
}

#[derive(Serialize)]
struct StepMetrics {
    steady: Vec<experiments::SweepPoint>,
    /// Steady temperatures strictly decrease as the current rises.
    monotone: bool,
}

fn cmd_step_current(ctx: &Ctx, currents: &[f64], dwell: f64) -> Result<()> {
    let p = &ctx.cfg.plant;
    if currents.is_empty() {
        return Err(Error::invalid(
            "currents",
            "need at least one drive amplitude",
        ));
    }
    let mut sorted = currents.to_vec();
    sorted.sort_by(f64::total_cmp);
    let steady = experiments::current_sweep(p, &sorted)?;
    let monotone = steady.windows(2).all(|w| w[1].t_e < w[0].t_e);
    let trace = match &ctx.cfg.scenario.current_profile {
        Some(_) => run_open_loop(p, &ctx.cfg.scenario)?,
        None => experiments::current_steps(p, currents, dwell, ctx.cfg.scenario.sample_period)?,
    };
    println!("{:>8}  {:>10}  {:>10}", "I_amp/A", "T_E/K", "T_C/K");
    for s in &steady {
        println!("{:8.3}  {:10.3}  {:10.3}", s.i_amp, s.t_e, s.t_c);
    }
    ctx.finish("step-current", p, StepMetrics { steady, monotone }, &trace)
}

#[derive(Serialize)]
struct PulseRow {
    load: f64,
    peak: f64,
    rise: f64,
    peak_time: f64,
    final_t_e: f64,
}

#[derive(Serialize)]
struct PulseMetrics {
    i_amp: f64,
    baseline: f64,
    width: f64,
    pulses: Vec<PulseRow>,
}

fn cmd_pulse_load(
    ctx: &Ctx,
    current: f64,
    loads: &[f64],
    onset: f64,
    width: f64,
    duration: f64,
) -> Result<()> {
    let p = &ctx.cfg.plant;
    if loads.is_empty() {
        return Err(Error::invalid("loads", "need at least one pulse"));
    }
    let runs = experiments::load_pulses(p, current, loads, onset, width, duration)?;
    let baseline = runs[0].baseline;
    println!("baseline {baseline:.3} K at {current} A");
    println!("{:>8}  {:>10}  {:>8}", "Q/W", "peak/K", "t_pk/s");
    let mut pulses = Vec::new();
    for (k, r) in runs.iter().enumerate() {
        println!("{:8.4}  {:10.3}  {:8.1}", r.load, r.peak, r.peak_time);
        output::write_trace(&ctx.out, &format!("trace_pulse{}.csv", k + 1), &r.trace)?;
        pulses.push(PulseRow {
            load: r.load,
            peak: r.peak,
            rise: r.peak - r.baseline,
            peak_time: r.peak_time,
            final_t_e: r.final_t_e,
        });
    }
    let last = &runs[runs.len() - 1].trace;
    let m = PulseMetrics {
        i_amp: current,
        baseline,
        width,
        pulses,
    };
    ctx.finish("pulse-load", p, m, last)
}

#[derive(Serialize)]
struct ClosedLoopMetrics {
    final_t_e: f64,
    final_u: f64,
    /// Response to the first set-point change, when there is one.
    setpoint_response: Option<ResponseMetrics>,
}

fn cmd_closed_loop(ctx: &Ctx) -> Result<()> {
    let p = &ctx.cfg.plant;
    let sc = &ctx.cfg.scenario;
    let sp = sc
        .sp_profile
        .as_ref()
        .ok_or_else(|| Error::invalid("setpoint", "closed-loop needs a set-point profile"))?;
    let trace = run_closed_loop(p, &ctx.cfg.controller, sc)?;
    let setpoint_response = match sp.points() {
        [(_, from), (t0, to), rest @ ..] => {
            let end = rest.first().map_or(f64::INFINITY, |r| r.0);
            Some(response_metrics(
                &trace.window(0.0, end),
                *t0,
                *from,
                *to,
                settling_band(to - from),
            )?)
        }
        _ => None,
    };
    let last = trace.last().copied();
    let m = ClosedLoopMetrics {
        final_t_e: last.map_or(f64::NAN, |r| r.t_e),
        final_u: last.map_or(f64::NAN, |r| r.u),
        setpoint_response,
    };
    println!("final T_E {:.3} K, u {:.4} A", m.final_t_e, m.final_u);
    if let Some(r) = &m.setpoint_response {
        print_metrics("set-point", r);
    }
    ctx.finish("closed-loop", p, m, &trace)
}

fn print_metrics(label: &str, r: &ResponseMetrics) {
    println!(
        "{label}: peak time {:.1} s, overshoot {:.3} K, settling {:.1} s, steady {:.3} K",
        r.peak_time, r.peak_overshoot, r.settling_time, r.steady_value
    );
}

fn triple(s: &str) -> Result<(f64, f64, f64)> {
    let v = floats(s, "target")?;
    match v[..] {
        [i, q, t] => Ok((i, q, t)),
        _ => Err(Error::invalid(
            "target",
            format!("expected I:Q:T, got `{s}`"),
        )),
    }
}

fn pair(s: &str) -> Result<(f64, f64)> {
    let v = floats(s, "check")?;
    match v[..] {
        [i, t] => Ok((i, t)),
        _ => Err(Error::invalid("check", format!("expected I:T, got `{s}`"))),
    }
}

fn floats(s: &str, key: &str) -> Result<Vec<f64>> {
    s.split(':')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(key, format!("`{x}` is not a number")))
        })
        .collect()
}

#[derive(Serialize)]
struct HeldOut {
    i_amp: f64,
    t_e_measured: f64,
    t_e_model: f64,
    error: f64,
}

#[derive(Serialize)]
struct CalibrationMetrics {
    targets: Vec<CalTarget>,
    fitted: Vec<(&'static str, f64)>,
    residual: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    held_out: Vec<HeldOut>,
}

fn cmd_calibrate(ctx: &Ctx, targets: &[String], checks: &[String]) -> Result<()> {
    let targets: Vec<CalTarget> = if targets.is_empty() {
        DEFAULT_TARGETS.to_vec()
    } else {
        targets.iter().map(|s| triple(s)).collect::<Result<_>>()?
    }
    .into_iter()
    .map(|(i_amp, q_ab, t_e)| CalTarget { i_amp, q_ab, t_e })
    .collect();
    let checks: Vec<(f64, f64)> = if checks.is_empty() {
        DEFAULT_CHECKS.to_vec()
    } else {
        checks.iter().map(|s| pair(s)).collect::<Result<_>>()?
    };

    let (result, failure) = match calibrate(&ctx.cfg.plant, &targets) {
        Ok(r) => (r, None),
        Err(Error::CalibrationFailed { best }) => {
            let e = Error::CalibrationFailed { best: best.clone() };
            (*best, Some(e))
        }
        Err(e) => return Err(e),
    };
    let p = result.params;
    let mut held_out = Vec::new();
    for &(i_amp, measured) in &checks {
        let model = steady_state(&p, i_amp, 0.0)?.t_e;
        held_out.push(HeldOut {
            i_amp,
            t_e_measured: measured,
            t_e_model: model,
            error: model - measured,
        });
    }
    let fitted = result
        .free
        .iter()
        .map(|c| (c.name(), c.get(&p)))
        .collect::<Vec<_>>();
    for (name, v) in &fitted {
        println!("{name} = {v}");
    }
    println!(
        "residual {:.3e} K after {} sweeps",
        result.residual, result.iterations
    );
    for h in &held_out {
        println!(
            "check {:.3} A: model {:.3} K, measured {:.3} K ({:+.3})",
            h.i_amp, h.t_e_model, h.t_e_measured, h.error
        );
    }

    let mut fitted_cfg = ctx.cfg.clone();
    fitted_cfg.plant = p;
    output::write_text(&ctx.out, "calibrated.cfg", &fitted_cfg.serialize()?)?;
    let m = CalibrationMetrics {
        targets,
        fitted,
        residual: result.residual,
        iterations: result.iterations,
        evaluations: result.evaluations,
        converged: failure.is_none(),
        held_out,
    };
    ctx.finish("calibrate", &p, m, &Trace::default())?;
    failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct CaseRow {
    name: String,
    mode: LoopMode,
    k_p: f64,
    k_i: f64,
    a: f64,
    setpoint: ResponseMetrics,
    disturbance: ResponseMetrics,
}

#[derive(Serialize)]
struct CompareMetrics {
    experiment: ControllerExperiment,
    cases: Vec<CaseRow>,
}

fn cmd_compare(ctx: &Ctx) -> Result<()> {
    let p = &ctx.cfg.plant;
    let base = ctx.cfg.controller;
    let cases: Vec<ControllerCase> = experiments::standard_cases()
        .into_iter()
        .map(|c| ControllerCase {
            name: c.name,
            config: LoopConfig {
                mode: c.config.mode,
                pi: crate::control::PIConfig {
                    k_p: c.config.pi.k_p,
                    k_i: c.config.pi.k_i,
                    ..base.pi
                },
                filter: c.config.filter,
                error_scale: base.error_scale,
            },
        })
        .collect();
    let exp = ControllerExperiment::default();
    let results = experiments::compare_controllers(p, &exp, &cases)?;

    println!(
        "{:<12} | {:>8} {:>9} {:>9} | {:>8} {:>9} {:>9}",
        "case", "sp t_pk", "sp os/K", "sp t_s", "ld t_pk", "ld pk/K", "ld t_s"
    );
    for r in &results {
        println!(
            "{:<12} | {:8.1} {:9.3} {:9.1} | {:8.1} {:9.3} {:9.1}",
            r.name,
            r.setpoint.peak_time,
            r.setpoint.peak_overshoot,
            r.setpoint.settling_time,
            r.disturbance.peak_time,
            r.disturbance.peak_overshoot,
            r.disturbance.settling_time
        );
        output::write_trace(&ctx.out, &format!("trace_{}.csv", r.name), &r.trace)?;
    }
    let rows = results
        .iter()
        .map(|r| CaseRow {
            name: r.name.clone(),
            mode: r.config.mode,
            k_p: r.config.pi.k_p,
            k_i: r.config.pi.k_i,
            a: r.config.filter.a,
            setpoint: r.setpoint,
            disturbance: r.disturbance,
        })
        .collect();
    let last = results.last().map(|r| r.trace.clone()).unwrap_or_default();
    ctx.finish(
        "compare-controllers",
        p,
        CompareMetrics {
            experiment: exp,
            cases: rows,
        },
        &last,
    )
}
