use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::CoolerState;

/// Piecewise-constant signal given as `(t, value)` breakpoints sorted by time.
/// The value before the first breakpoint is the first value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    points: Vec<(f64, f64)>,
}

impl Profile {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("profile needs at least one point".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Domain(format!(
                    "profile times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if points
            .iter()
            .any(|&(t, v)| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::Domain("profile values must be finite".into()));
        }
        Ok(Self { points })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            points: vec![(0.0, value)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn at(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|&(tp, _)| tp <= t);
        self.points[idx.saturating_sub(1)].1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    Ambient,
    /// Steady state at this drive amplitude and the load applied at t = 0.
    Steady {
        i_amp: f64,
    },
    State(Box<CoolerState>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Simulated span, s.
    pub duration: f64,
    /// Trace spacing, s. Rounded to whole drive periods.
    pub sample_period: f64,
    /// Set-point, K. Drives closed-loop runs.
    pub sp_profile: Option<Profile>,
    /// Applied cold-tip load, W.
    pub load_profile: Profile,
    /// Drive amplitude, A. Drives open-loop runs.
    pub current_profile: Option<Profile>,
    pub initial: InitialState,
    /// Drive amplitude held before the first controller tick; also the
    /// bumpless seed of the integrator.
    pub initial_current: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            duration: 600.0,
            sample_period: 1.0,
            sp_profile: None,
            load_profile: Profile::constant(0.0),
            current_profile: None,
            initial: InitialState::Ambient,
            initial_current: 0.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", "must be > 0"));
        }
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(Error::invalid("sample_period", "must be > 0"));
        }
        if !(self.initial_current >= 0.0 && self.initial_current.is_finite()) {
            return Err(Error::invalid("initial_current", "must be >= 0"));
        }
        if self.load_profile.points().iter().any(|&(_, q)| q < 0.0) {
            return Err(Error::invalid("load", "applied load must be >= 0"));
        }
        if let InitialState::Steady { i_amp } = self.initial {
            if !(i_amp >= 0.0 && i_amp.is_finite()) {
                return Err(Error::invalid(
                    "initial",
                    "steady-state drive amplitude must be >= 0",
                ));
            }
        }
        if let Some(c) = &self.current_profile {
            if c.points().iter().any(|&(_, i)| i < 0.0) {
                return Err(Error::invalid("current", "drive amplitude must be >= 0"));
            }
        }
        Ok(())
    }
}

/// One telemetry row. Set-point columns are NaN in open-loop runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub t_e: f64,
    pub t_c: f64,
    pub sp: f64,
    pub filtered_sp: f64,
    pub u: f64,
    pub q_ab: f64,
    pub x_amp: f64,
    pub p_comp: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn t_e(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t_e).collect()
    }

    /// Rows with `t0 <= t < t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Trace {
        Trace {
            rows: self
                .rows
                .iter()
                .filter(|r| r.t >= t0 && r.t < t1)
                .copied()
                .collect(),
        }
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_piecewise_constant() {
        let p = Profile::new(vec![(0.0, 170.0), (60.0, 151.0)]).unwrap();
        assert_eq!(p.at(-1.0), 170.0);
        assert_eq!(p.at(59.999), 170.0);
        assert_eq!(p.at(60.0), 151.0);
        assert_eq!(p.at(1e9), 151.0);
        assert_eq!(Profile::constant(2.0).at(5.0), 2.0);
    }

    #[test]
    fn malformed_profiles_are_rejected() {
        assert!(Profile::new(vec![]).is_err());
        assert!(Profile::new(vec![(1.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(Profile::new(vec![(0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn scenario_defaults() {
        let s = Scenario::default();
        assert_eq!((s.duration, s.sample_period), (600.0, 1.0));
        assert_eq!(s.initial, InitialState::Ambient);
        s.validate().unwrap();
        let bad = Scenario {
            load_profile: Profile::constant(-0.1),
            ..Scenario::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Invalid { key, .. }) if key == "load"));
    }
}
