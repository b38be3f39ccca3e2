use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gas::{isentropic_dpdt, work_rate, ChamberGas};
use super::params::{CoolerParams, GAMMA, SUBSTEPS_PER_QUARTER};
use super::piston::{piston_step, PistonState};
use super::regen::{regen_cool, regen_return, RegenState};
use crate::error::{Error, Result};

/// Full plant state. T_C and T_E live only inside the chamber gases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolerState {
    pub piston: PistonState,
    pub comp: ChamberGas,
    pub exp: ChamberGas,
    pub regen: RegenState,
    pub t: f64,
}

impl CoolerState {
    /// Everything at T_ab, piston at rest, inventory split by nominal volume.
    pub fn ambient(p: &CoolerParams) -> Result<Self> {
        Self::uniform(p, p.t_ab)
    }

    /// Everything at temperature `temp`, inventory split by nominal volume.
    pub fn uniform(p: &CoolerParams, temp: f64) -> Result<Self> {
        p.validate()?;
        let n = p.charge_moles();
        let (vc, ve) = (p.v_comp(), p.v_exp());
        let vt = vc + ve;
        Ok(Self {
            piston: PistonState::default(),
            comp: ChamberGas::new(n * vc / vt, temp, vc, p.r_gas)?,
            exp: ChamberGas::new(n * ve / vt, temp, ve, p.r_gas)?,
            regen: RegenState {
                t_r1: temp,
                t_r2: temp,
            },
            t: 0.0,
        })
    }

    pub fn t_c(&self) -> f64 {
        self.comp.t
    }

    pub fn t_e(&self) -> f64 {
        self.exp.t
    }
}

/// End-of-cycle telemetry. Energies are totals over the cycle, J.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TelemetrySample {
    pub t: f64,
    pub t_e: f64,
    pub t_c: f64,
    pub p_comp: f64,
    pub x: f64,
    /// Half the peak-to-peak piston excursion over the cycle, m.
    pub x_amp: f64,
    pub w_comp: f64,
    pub w_exp: f64,
    pub q_rej: f64,
    pub q_bl: f64,
    pub q_ab: f64,
}

impl TelemetrySample {
    /// Net work delivered to the gas over the cycle.
    pub fn w_net(&self) -> f64 {
        self.w_comp - self.w_exp
    }

    /// First-law residual W_net + Q_ab + Q_bl − Q_rej, J.
    pub fn energy_residual(&self) -> f64 {
        self.w_net() + self.q_ab + self.q_bl - self.q_rej
    }
}

/// Q̇_rej = UA_rej·(T_C − T_ab). Negative below ambient.
pub fn heat_rejection(t_c: f64, p: &CoolerParams) -> f64 {
    p.ua_rej * (t_c - p.t_ab)
}

/// Q̇_bl = h·A_s·(T_ab − T_E).
pub fn base_load_heat(t_e: f64, p: &CoolerParams) -> f64 {
    p.h * p.a_s * (p.t_ab - t_e)
}

/// Explicit lumped energy balance T + (Ẇ + Q̇)·dt/C.
pub fn chamber_energy_step(
    t: f64,
    heat_cap: f64,
    wdot: f64,
    qdot_net: f64,
    dt: f64,
) -> Result<f64> {
    if !(heat_cap > 0.0 && dt > 0.0) {
        return Err(Error::Domain(format!(
            "heat capacity and dt must be > 0, got {heat_cap} and {dt}"
        )));
    }
    let next = t + (wdot + qdot_net) * dt / heat_cap;
    if !(next > 0.0) {
        return Err(Error::NonPhysicalTemperature { temperature: next });
    }
    Ok(next)
}

/// Advances one drive period through compression, cold-ward regeneration,
/// expansion and warm-ward regeneration, each a quarter of the period.
///
/// The coil is driven with `i_amp·sin(2πft)` during the compression and
/// expansion quarters only. Chamber volumes follow the piston sweep and are
/// restored to nominal at the end of the cycle. A gas slug whose heat
/// capacity matches the matrix crosses the regenerator cold-ward after
/// compression and warm-ward after expansion; the cold node (tip plus
/// expansion gas) holds it in between.
/// Rejection, base load and applied load act on every sub-step.
pub fn cycle_step(
    state: &CoolerState,
    i_amp: f64,
    qdot_ab: f64,
    p: &CoolerParams,
) -> Result<(CoolerState, TelemetrySample)> {
    if !(i_amp >= 0.0 && qdot_ab >= 0.0) {
        return Err(Error::Domain(format!(
            "drive amplitude and applied load must be >= 0, got {i_amp} A and {qdot_ab} W"
        )));
    }
    let dt = p.substep();
    let omega = 2.0 * PI * p.f_drive;
    let (vc_nom, ve_nom) = (p.v_comp(), p.v_exp());
    let mut s = *state;
    let mut tel = TelemetrySample::default();

    let mut c_comp = p.gas_heat_capacity(s.comp.n);
    let mut c_cold = p.c_tip + p.gas_heat_capacity(s.exp.n);
    let mut parcel = 0.0;
    let (mut x_min, mut x_max) = (s.piston.x, s.piston.x);

    for quarter in 0..4 {
        match quarter {
            1 => {
                // balanced pass: the slug exchanged with the matrix carries
                // the matrix's own heat capacity
                parcel = p.m_r_cpr.min(0.5 * c_comp);
                let pass = regen_cool(s.comp.t, s.regen, parcel, p);
                s.regen = pass.regen;
                c_comp -= parcel;
                let t_e = (c_cold * s.exp.t + parcel * pass.t_out) / (c_cold + parcel);
                c_cold += parcel;
                s.exp.update(t_e, s.exp.v, p.r_gas)?;
            }
            3 => {
                let pass = regen_return(s.exp.t, s.regen, parcel, p);
                s.regen = pass.regen;
                c_cold -= parcel;
                let t_c = (c_comp * s.comp.t + parcel * pass.t_out) / (c_comp + parcel);
                c_comp += parcel;
                s.comp.update(t_c, s.comp.v, p.r_gas)?;
            }
            _ => {}
        }

        for k in 0..SUBSTEPS_PER_QUARTER {
            let local = ((quarter * SUBSTEPS_PER_QUARTER + k) as f64 + 0.5) * dt;
            let current = if quarter % 2 == 0 {
                i_amp * (omega * local).sin()
            } else {
                0.0
            };
            let x0 = s.piston.x;
            s.piston = piston_step(s.piston, current, s.comp.p - s.exp.p, p, dt)?;
            x_min = x_min.min(s.piston.x);
            x_max = x_max.max(s.piston.x);
            let dv = p.a_c * (s.piston.x - x0).abs();

            let q_rej = heat_rejection(s.comp.t, p);
            let q_bl = base_load_heat(s.exp.t, p);
            let (mut w_c, mut w_e) = (0.0, 0.0);
            let (mut vc, mut ve) = (s.comp.v, s.exp.v);
            if quarter == 0 {
                let dvdt = -dv / dt;
                let dpdt = isentropic_dpdt(s.comp.p, s.comp.v, dvdt, GAMMA);
                w_c = work_rate(s.comp.p, s.comp.v, dvdt, dpdt).abs();
                vc -= dv;
            } else if quarter == 2 {
                let dvdt = dv / dt;
                let dpdt = isentropic_dpdt(s.exp.p, s.exp.v, dvdt, GAMMA);
                w_e = work_rate(s.exp.p, s.exp.v, dvdt, dpdt).abs();
                ve += dv;
            }
            let t_c = chamber_energy_step(s.comp.t, c_comp, w_c, -q_rej, dt)?;
            let t_e = chamber_energy_step(s.exp.t, c_cold, -w_e, qdot_ab + q_bl, dt)?;
            s.comp.update(t_c, vc, p.r_gas)?;
            s.exp.update(t_e, ve, p.r_gas)?;

            tel.w_comp += w_c * dt;
            tel.w_exp += w_e * dt;
            tel.q_rej += q_rej * dt;
            tel.q_bl += q_bl * dt;
            tel.q_ab += qdot_ab * dt;
        }
    }

    s.comp.update(s.comp.t, vc_nom, p.r_gas)?;
    s.exp.update(s.exp.t, ve_nom, p.r_gas)?;
    s.t = state.t + 1.0 / p.f_drive;

    tel.t = s.t;
    tel.t_e = s.exp.t;
    tel.t_c = s.comp.t;
    tel.p_comp = s.comp.p;
    tel.x = s.piston.x;
    tel.x_amp = 0.5 * (x_max - x_min);
    Ok((s, tel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn loss_terms_by_hand() {
        let p = CoolerParams {
            ua_rej: 0.5,
            ..CoolerParams::default()
        };
        assert_eq!(heat_rejection(300.0, &p), 0.0);
        assert_relative_eq!(heat_rejection(320.0, &p), 10.0);
        assert_relative_eq!(heat_rejection(290.0, &p), -5.0);

        let p = CoolerParams::default();
        assert_eq!(base_load_heat(300.0, &p), 0.0);
        assert_eq!(base_load_heat(150.0, &CoolerParams { a_s: 0.0, ..p }), 0.0);
        assert_relative_eq!(base_load_heat(150.0, &p), 1.005, max_relative = 1e-3);
    }

    #[test]
    fn energy_step_by_hand() {
        assert_eq!(
            chamber_energy_step(300.0, 2.0, 0.0, 0.0, 0.01).unwrap(),
            300.0
        );
        assert_relative_eq!(
            chamber_energy_step(300.0, 2.0, 10.0, 0.0, 0.01).unwrap(),
            300.05
        );
        assert_relative_eq!(
            chamber_energy_step(150.0, 2.0, -3.0, 1.5, 0.01).unwrap(),
            149.9925
        );
        assert!(matches!(
            chamber_energy_step(1.0, 1.0, -1000.0, 0.0, 0.01),
            Err(Error::NonPhysicalTemperature { .. })
        ));
        assert!(chamber_energy_step(300.0, 0.0, 0.0, 0.0, 0.01).is_err());
    }

    #[test]
    fn undriven_ambient_cooler_stays_put() {
        let p = CoolerParams::default();
        let s0 = CoolerState::ambient(&p).unwrap();
        let mut s = s0;
        for _ in 0..50 {
            s = cycle_step(&s, 0.0, 0.0, &p).unwrap().0;
        }
        assert!((s.t_e() - p.t_ab).abs() < 1e-9);
        assert!((s.t_c() - p.t_ab).abs() < 1e-9);
        assert!(s.piston.x.abs() < 1e-12);
        assert_relative_eq!(s.t, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn undriven_cold_tip_warms() {
        let p = CoolerParams::default();
        let s = CoolerState::uniform(&p, 150.0).unwrap();
        let (next, tel) = cycle_step(&s, 0.0, 0.0, &p).unwrap();
        assert!(next.t_e() > s.t_e());
        assert!(tel.q_bl > 0.0);
    }

    #[test]
    fn drive_cools_and_keeps_gas_law() {
        let p = CoolerParams::default();
        let mut s = CoolerState::ambient(&p).unwrap();
        for _ in 0..2000 {
            let (next, tel) = cycle_step(&s, 1.55, 0.0, &p).unwrap();
            assert!(next.comp.gas_law_residual(p.r_gas) < 1e-9);
            assert!(next.exp.gas_law_residual(p.r_gas) < 1e-9);
            assert!(tel.x_amp > 0.0);
            s = next;
        }
        assert!(s.t_e() < p.t_ab - 1.0);
    }

    #[test]
    fn rejects_negative_inputs() {
        let p = CoolerParams::default();
        let s = CoolerState::ambient(&p).unwrap();
        assert!(matches!(
            cycle_step(&s, -0.1, 0.0, &p),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            cycle_step(&s, 1.0, -0.1, &p),
            Err(Error::Domain(_))
        ));
    }
}
