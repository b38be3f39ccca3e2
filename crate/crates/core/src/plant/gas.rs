use serde::{Deserialize, Serialize};

use super::params::MOLAR_MASS_HE;
use crate::error::{Error, Result};

fn check_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(())
}

/// P = n·R·T/V.
pub fn ideal_gas_pressure(n: f64, t: f64, v: f64, r_gas: f64) -> Result<f64> {
    check_positive(&[("n", n), ("T", t), ("V", v), ("R", r_gas)])?;
    Ok(n * r_gas * t / v)
}

/// n = P·V/(R·T).
pub fn ideal_gas_moles(p: f64, v: f64, t: f64, r_gas: f64) -> Result<f64> {
    check_positive(&[("P", p), ("V", v), ("T", t), ("R", r_gas)])?;
    Ok(p * v / (r_gas * t))
}

/// Gas in one chamber. Pressure is always derived from the other three
/// through the gas law, so the invariant holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberGas {
    pub p: f64,
    pub v: f64,
    pub t: f64,
    pub n: f64,
}

impl ChamberGas {
    pub fn new(n: f64, t: f64, v: f64, r_gas: f64) -> Result<Self> {
        let p = ideal_gas_pressure(n, t, v, r_gas)?;
        Ok(Self { p, v, t, n })
    }

    /// Gas mass, kg.
    pub fn m_he(&self) -> f64 {
        self.n * MOLAR_MASS_HE
    }

    /// Replaces temperature and volume, then re-derives pressure.
    pub fn update(&mut self, t: f64, v: f64, r_gas: f64) -> Result<()> {
        self.p = ideal_gas_pressure(self.n, t, v, r_gas)?;
        self.t = t;
        self.v = v;
        Ok(())
    }

    /// Relative residual of P·V = n·R·T.
    pub fn gas_law_residual(&self, r_gas: f64) -> f64 {
        let rhs = self.n * r_gas * self.t;
        ((self.p * self.v - rhs) / rhs).abs()
    }
}

/// Signed work rate P·dV/dt + V·dP/dt. Callers pick the sign convention.
pub fn work_rate(p: f64, v: f64, dvdt: f64, dpdt: f64) -> f64 {
    p * dvdt + v * dpdt
}

/// Pressure rate for a reversible adiabatic volume change, dP/dt = -γ·P·(dV/dt)/V.
pub fn isentropic_dpdt(p: f64, v: f64, dvdt: f64, gamma: f64) -> f64 {
    -gamma * p * dvdt / v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pressure_of_one_mole() {
        let p = ideal_gas_pressure(1.0, 300.0, 1.0, 8.314).unwrap();
        assert_relative_eq!(p, 2494.2, max_relative = 1e-12);
        let p2 = ideal_gas_pressure(1.0, 600.0, 1.0, 8.314).unwrap();
        assert_eq!(p2, 2.0 * p);
    }

    #[test]
    fn charge_of_the_compression_space() {
        let v = 1.3273e-4 * 0.06;
        let n = ideal_gas_moles(2.0e6, v, 300.0, 8.314).unwrap();
        assert_relative_eq!(n, 6.384e-3, max_relative = 1e-3);
        assert_relative_eq!(n * MOLAR_MASS_HE, 2.555e-5, max_relative = 1e-3);
    }

    #[test]
    fn non_positive_inputs_are_domain_errors() {
        assert!(matches!(
            ideal_gas_pressure(0.0, 300.0, 1.0, 8.314),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ideal_gas_pressure(1.0, -1.0, 1.0, 8.314),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ideal_gas_moles(1.0, 1.0, 0.0, 8.314),
            Err(Error::Domain(_))
        ));
        assert!(ideal_gas_pressure(1.0, 300.0, f64::NAN, 8.314).is_err());
    }

    #[test]
    fn work_rate_by_hand() {
        assert_eq!(work_rate(2e6, 8e-6, 0.0, 0.0), 0.0);
        assert_relative_eq!(work_rate(2e6, 3.7e-6, -1e-4, 0.0), -200.0);
        assert_relative_eq!(work_rate(1e5, 1e-5, 0.0, 1e7), 100.0);
    }

    #[test]
    fn update_keeps_the_gas_law() {
        let mut g = ChamberGas::new(6e-3, 300.0, 8e-6, 8.314).unwrap();
        g.update(151.3, 7.1e-6, 8.314).unwrap();
        assert!(g.gas_law_residual(8.314) < 1e-12);
        assert!(g.update(-1.0, 7.1e-6, 8.314).is_err());
        assert_eq!(g.t, 151.3);
    }
}
