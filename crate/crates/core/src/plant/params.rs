use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Helium molar mass, kg/mol.
pub const MOLAR_MASS_HE: f64 = 4.0026e-3;

/// Ratio of specific heats for a monatomic gas.
pub const GAMMA: f64 = 5.0 / 3.0;

/// Piston/gas sub-steps per quarter of the drive period.
pub const SUBSTEPS_PER_QUARTER: usize = 50;

/// Physical constants and closure parameters of the cooler. SI throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolerParams {
    /// Moving mass, kg.
    pub mass: f64,
    /// Viscous damping, N·s/m.
    pub damping: f64,
    /// Suspension spring constant, N/m.
    pub stiffness: f64,
    /// Motor force constant (coil length times flux density), N/A.
    pub k_m: f64,
    /// Compressor piston face area, m².
    pub a_c: f64,
    /// Compressor length, m.
    pub l_c: f64,
    /// Expander bore, m.
    pub d_e: f64,
    /// Expander length, m.
    pub l_e: f64,
    /// Charge pressure, Pa.
    pub p0: f64,
    /// Ambient / sink temperature, K.
    pub t_ab: f64,
    /// Drive frequency, Hz.
    pub f_drive: f64,
    /// Regenerator effectiveness.
    pub eps: f64,
    /// Free-convection coefficient for the base load, W/(m²·K).
    pub h: f64,
    /// Load-exposed cold-tip area, m².
    pub a_s: f64,
    /// Heat-rejection conductance, W/K.
    pub ua_rej: f64,
    /// Regenerator matrix heat capacity, J/K.
    pub m_r_cpr: f64,
    /// Cold-tip (cold finger plus detector mount) heat capacity, J/K.
    pub c_tip: f64,
    /// Helium specific heat, J/(kg·K).
    pub c_phe: f64,
    /// Universal gas constant, J/(mol·K).
    pub r_gas: f64,
    /// Coil resistance used to map electrical input power to drive amplitude, ohm.
    pub r_coil: f64,
}

impl Default for CoolerParams {
    fn default() -> Self {
        let d_e = 0.013;
        let face = PI * d_e * d_e / 4.0;
        Self {
            mass: 1.0,
            damping: 0.116,
            stiffness: 40_000.0,
            k_m: 25.68,
            a_c: face,
            l_c: 0.06,
            d_e,
            l_e: 0.082,
            p0: 2.0e6,
            t_ab: 300.0,
            f_drive: 50.0,
            eps: 0.98,
            h: 50.481,
            a_s: face,
            ua_rej: 0.1637,
            m_r_cpr: 1.0e-3,
            c_tip: 4.0,
            c_phe: 5193.0,
            r_gas: 8.314,
            r_coil: 6.05,
        }
    }
}

impl CoolerParams {
    /// Field names, in declaration order; also the config-file keys.
    pub const KEYS: [&'static str; 20] = [
        "mass",
        "damping",
        "stiffness",
        "k_m",
        "a_c",
        "l_c",
        "d_e",
        "l_e",
        "p0",
        "t_ab",
        "f_drive",
        "eps",
        "h",
        "a_s",
        "ua_rej",
        "m_r_cpr",
        "c_tip",
        "c_phe",
        "r_gas",
        "r_coil",
    ];

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "mass" => self.mass,
            "damping" => self.damping,
            "stiffness" => self.stiffness,
            "k_m" => self.k_m,
            "a_c" => self.a_c,
            "l_c" => self.l_c,
            "d_e" => self.d_e,
            "l_e" => self.l_e,
            "p0" => self.p0,
            "t_ab" => self.t_ab,
            "f_drive" => self.f_drive,
            "eps" => self.eps,
            "h" => self.h,
            "a_s" => self.a_s,
            "ua_rej" => self.ua_rej,
            "m_r_cpr" => self.m_r_cpr,
            "c_tip" => self.c_tip,
            "c_phe" => self.c_phe,
            "r_gas" => self.r_gas,
            "r_coil" => self.r_coil,
            _ => return None,
        })
    }

    /// Sets one field by name. Values are not validated here.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "mass" => &mut self.mass,
            "damping" => &mut self.damping,
            "stiffness" => &mut self.stiffness,
            "k_m" => &mut self.k_m,
            "a_c" => &mut self.a_c,
            "l_c" => &mut self.l_c,
            "d_e" => &mut self.d_e,
            "l_e" => &mut self.l_e,
            "p0" => &mut self.p0,
            "t_ab" => &mut self.t_ab,
            "f_drive" => &mut self.f_drive,
            "eps" => &mut self.eps,
            "h" => &mut self.h,
            "a_s" => &mut self.a_s,
            "ua_rej" => &mut self.ua_rej,
            "m_r_cpr" => &mut self.m_r_cpr,
            "c_tip" => &mut self.c_tip,
            "c_phe" => &mut self.c_phe,
            "r_gas" => &mut self.r_gas,
            "r_coil" => &mut self.r_coil,
            _ => return Err(Error::invalid(key, "unknown plant parameter")),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("damping", self.damping),
            ("stiffness", self.stiffness),
            ("k_m", self.k_m),
            ("a_c", self.a_c),
            ("l_c", self.l_c),
            ("d_e", self.d_e),
            ("l_e", self.l_e),
            ("p0", self.p0),
            ("t_ab", self.t_ab),
            ("f_drive", self.f_drive),
            ("h", self.h),
            ("a_s", self.a_s),
            ("ua_rej", self.ua_rej),
            ("m_r_cpr", self.m_r_cpr),
            ("c_tip", self.c_tip),
            ("c_phe", self.c_phe),
            ("r_gas", self.r_gas),
            ("r_coil", self.r_coil),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::invalid("eps", "effectiveness must lie in (0,1]"));
        }
        Ok(())
    }

    /// Expander face area π·d_e²/4.
    pub fn a_e(&self) -> f64 {
        PI * self.d_e * self.d_e / 4.0
    }

    /// Nominal compression-space volume A_c·L_c.
    pub fn v_comp(&self) -> f64 {
        self.a_c * self.l_c
    }

    /// Nominal expansion-space volume A_e·L_e.
    pub fn v_exp(&self) -> f64 {
        self.a_e() * self.l_e
    }

    /// Helium inventory from the charge condition (P0 over both volumes at T_ab), mol.
    pub fn charge_moles(&self) -> f64 {
        self.p0 * (self.v_comp() + self.v_exp()) / (self.r_gas * self.t_ab)
    }

    /// Undamped natural frequency √(K/M)/2π, Hz.
    pub fn natural_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt() / (2.0 * PI)
    }

    /// Drive period split into 4·N sub-steps, s.
    pub fn substep(&self) -> f64 {
        1.0 / (self.f_drive * 4.0 * SUBSTEPS_PER_QUARTER as f64)
    }

    /// Heat capacity of `n` moles of helium, J/K.
    pub fn gas_heat_capacity(&self, n: f64) -> f64 {
        n * MOLAR_MASS_HE * self.c_phe
    }

    /// Drive amplitude delivering `power` W of electrical input, P = ½·I²·R_coil.
    pub fn current_for_power(&self, power: f64) -> f64 {
        (2.0 * power.max(0.0) / self.r_coil).sqrt()
    }

    pub fn power_for_current(&self, i_amp: f64) -> f64 {
        0.5 * i_amp * i_amp * self.r_coil
    }
}
