use serde::{Deserialize, Serialize};

use super::params::CoolerParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PistonState {
    /// Displacement, m.
    pub x: f64,
    /// Velocity, m/s.
    pub v: f64,
}

impl PistonState {
    /// Mechanical energy ½Mv² + ½Kx², J.
    pub fn energy(&self, p: &CoolerParams) -> f64 {
        0.5 * p.mass * self.v * self.v + 0.5 * p.stiffness * self.x * self.x
    }
}

/// Advances M·ẍ + D·ẋ + K·x = K_m·I − A_c·ΔP over `dt` with the force held
/// constant across the step.
///
/// The linear part is integrated with the trapezoidal rule. For a damped
/// oscillator that map is a contraction in the energy norm, so the unforced
/// energy never grows, whatever `dt`.
pub fn piston_step(
    s: PistonState,
    i_inst: f64,
    dp: f64,
    p: &CoolerParams,
    dt: f64,
) -> Result<PistonState> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    let force = p.k_m * i_inst - p.a_c * dp;
    let alpha = dt * p.damping / (2.0 * p.mass);
    let beta = dt * dt * p.stiffness / (4.0 * p.mass);
    let v = (s.v * (1.0 - alpha - beta) + dt / p.mass * (force - p.stiffness * s.x))
        / (1.0 + alpha + beta);
    let x = s.x + 0.5 * dt * (s.v + v);
    let next = PistonState { x, v };
    if !(x.abs() <= p.l_c) {
        return Err(Error::Overtravel { state: next });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rest_is_a_fixed_point() {
        let p = CoolerParams::default();
        for dt in [1e-6, 1e-4, 1e-3] {
            let s = piston_step(PistonState::default(), 0.0, 0.0, &p, dt).unwrap();
            assert_eq!(s, PistonState::default());
        }
    }

    #[test]
    fn constant_force_settles_at_f_over_k() {
        let p = CoolerParams {
            k_m: 10.0,
            damping: 400.0,
            ..CoolerParams::default()
        };
        let mut s = PistonState::default();
        for _ in 0..20_000 {
            s = piston_step(s, 1.0, 0.0, &p, 1e-4).unwrap();
        }
        assert_relative_eq!(s.x, 2.5e-4, max_relative = 1e-9);
        assert!(s.v.abs() < 1e-9);
    }

    #[test]
    fn free_oscillation_frequency() {
        let p = CoolerParams {
            damping: 0.0,
            ..CoolerParams::default()
        };
        assert_relative_eq!(p.natural_frequency(), 31.83, max_relative = 1e-3);

        let dt = 1e-5;
        let mut s = PistonState { x: 1e-4, v: 0.0 };
        let mut crossings = Vec::new();
        for k in 0..100_000 {
            let next = piston_step(s, 0.0, 0.0, &p, dt).unwrap();
            if s.x.signum() != next.x.signum() {
                let frac = s.x / (s.x - next.x);
                crossings.push((k as f64 + frac) * dt);
            }
            s = next;
        }
        let half_periods = (crossings.len() - 1) as f64;
        let f = half_periods / (2.0 * (crossings[crossings.len() - 1] - crossings[0]));
        assert_relative_eq!(f, p.natural_frequency(), max_relative = 1e-3);
        assert_relative_eq!(f, 31.83, max_relative = 1e-3);
    }

    #[test]
    fn overtravel_carries_the_state() {
        let p = CoolerParams::default();
        let err = piston_step(PistonState { x: 0.0, v: 1e3 }, 0.0, 0.0, &p, 1e-3).unwrap_err();
        match err {
            Error::Overtravel { state } => assert!(state.x.abs() > p.l_c),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_non_positive_dt() {
        let p = CoolerParams::default();
        assert!(piston_step(PistonState::default(), 0.0, 0.0, &p, 0.0).is_err());
    }
}
