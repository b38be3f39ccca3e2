use serde::{Deserialize, Serialize};

use super::run::steady_state;
use crate::error::{Error, Result};
use crate::plant::CoolerParams;

/// Closure parameters open to calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CalParam {
    KM,
    UaRej,
    As,
    MrCpr,
    Ac,
}

impl CalParam {
    pub const ALL: [CalParam; 5] = [
        CalParam::KM,
        CalParam::UaRej,
        CalParam::As,
        CalParam::MrCpr,
        CalParam::Ac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CalParam::KM => "k_m",
            CalParam::UaRej => "ua_rej",
            CalParam::As => "a_s",
            CalParam::MrCpr => "m_r_cpr",
            CalParam::Ac => "a_c",
        }
    }

    pub fn get(self, p: &CoolerParams) -> f64 {
        match self {
            CalParam::KM => p.k_m,
            CalParam::UaRej => p.ua_rej,
            CalParam::As => p.a_s,
            CalParam::MrCpr => p.m_r_cpr,
            CalParam::Ac => p.a_c,
        }
    }

    pub fn set(self, p: &mut CoolerParams, v: f64) {
        match self {
            CalParam::KM => p.k_m = v,
            CalParam::UaRej => p.ua_rej = v,
            CalParam::As => p.a_s = v,
            CalParam::MrCpr => p.m_r_cpr = v,
            CalParam::Ac => p.a_c = v,
        }
    }
}

/// A measured steady cold-tip temperature at a drive amplitude and load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalTarget {
    pub i_amp: f64,
    pub q_ab: f64,
    pub t_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub free: Vec<CalParam>,
    /// Maximum number of coordinate sweeps.
    pub max_sweeps: usize,
    /// Initial multiplicative step, as a natural-log increment.
    pub initial_step: f64,
    /// Search stops once every step is below this log increment.
    pub min_step: f64,
    /// Search stops once the RMS residual is below this, K.
    pub stop_residual: f64,
    /// Residual above which the fit is reported as failed, K.
    pub accept_residual: f64,
}

impl CalibrationOptions {
    /// All five parameters when there are enough targets to pin them,
    /// otherwise only UA_rej and K_m.
    pub fn for_targets(n_targets: usize) -> Self {
        let free = if n_targets >= CalParam::ALL.len() {
            CalParam::ALL.to_vec()
        } else {
            vec![CalParam::KM, CalParam::UaRej]
        };
        Self {
            free,
            max_sweeps: 200,
            initial_step: 0.2,
            min_step: 1e-8,
            stop_residual: 1e-7,
            accept_residual: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: CoolerParams,
    pub free: Vec<CalParam>,
    /// RMS of steady T_E errors over the targets, K.
    pub residual: f64,
    /// Coordinate sweeps performed.
    pub iterations: usize,
    /// Objective evaluations (one steady-state solve per target each).
    pub evaluations: usize,
}

/// RMS steady-state error of `p` over `targets`; infinite if any solve fails.
pub fn residual(p: &CoolerParams, targets: &[CalTarget]) -> f64 {
    let mut sum = 0.0;
    for tg in targets {
        match steady_state(p, tg.i_amp, tg.q_ab) {
            Ok(ss) => sum += (ss.t_e - tg.t_e).powi(2),
            Err(_) => return f64::INFINITY,
        }
    }
    (sum / targets.len() as f64).sqrt()
}

pub fn calibrate(p0: &CoolerParams, targets: &[CalTarget]) -> Result<CalibrationResult> {
    calibrate_with(p0, targets, &CalibrationOptions::for_targets(targets.len()))
}

/// Coordinate descent in log-parameter space, so positivity holds
/// throughout. Each coordinate probes ±step, then tries the vertex of the
/// parabola through the three mean-square values; the best improving point
/// is kept and the step follows the size of the move, or halves when
/// nothing improved. The schedule is fixed, so results are reproducible.
pub fn calibrate_with(
    p0: &CoolerParams,
    targets: &[CalTarget],
    opts: &CalibrationOptions,
) -> Result<CalibrationResult> {
    p0.validate()?;
    if targets.is_empty() {
        return Err(Error::Domain(
            "calibration needs at least one target".into(),
        ));
    }
    if opts.free.is_empty() {
        return Err(Error::Domain(
            "calibration needs at least one free parameter".into(),
        ));
    }
    let mut best = *p0;
    let mut f_best = residual(&best, targets);
    let mut evaluations = 1;
    let mut steps = vec![opts.initial_step; opts.free.len()];
    let mut sweeps = 0;

    let eval = |param: CalParam, base: &CoolerParams, x: f64, evaluations: &mut usize| {
        let mut trial = *base;
        param.set(&mut trial, x.exp());
        if trial.validate().is_err() {
            return (trial, f64::INFINITY);
        }
        *evaluations += 1;
        (trial, residual(&trial, targets))
    };

    while sweeps < opts.max_sweeps
        && f_best > opts.stop_residual
        && steps.iter().any(|&s| s >= opts.min_step)
    {
        sweeps += 1;
        for (j, &param) in opts.free.iter().enumerate() {
            if f_best <= opts.stop_residual {
                break;
            }
            let h = steps[j];
            if h < opts.min_step {
                continue;
            }
            let x0 = param.get(&best).ln();
            let (tp, fp) = eval(param, &best, x0 + h, &mut evaluations);
            let (tm, fm) = eval(param, &best, x0 - h, &mut evaluations);
            let mut cands = vec![(x0 + h, tp, fp), (x0 - h, tm, fm)];
            let (sp, s0, sm) = (fp * fp, f_best * f_best, fm * fm);
            let curv = sp + sm - 2.0 * s0;
            if curv > 0.0 && curv.is_finite() {
                let xv = x0 + (h * (sm - sp) / (2.0 * curv)).clamp(-4.0 * h, 4.0 * h);
                let (tv, fv) = eval(param, &best, xv, &mut evaluations);
                cands.push((xv, tv, fv));
            }
            let (x, trial, f) =
                cands.into_iter().fold(
                    (x0, best, f_best),
                    |acc, c| if c.2 < acc.2 { c } else { acc },
                );
            if f < f_best {
                best = trial;
                f_best = f;
                steps[j] = (2.0 * (x - x0).abs()).min(1.0);
            } else {
                steps[j] = h * 0.5;
            }
        }
    }

    let result = CalibrationResult {
        params: best,
        free: opts.free.clone(),
        residual: f_best,
        iterations: sweeps,
        evaluations,
    };
    if f_best.is_finite() && f_best <= opts.accept_residual {
        Ok(result)
    } else {
        Err(Error::CalibrationFailed {
            best: Box::new(result),
        })
    }
}
