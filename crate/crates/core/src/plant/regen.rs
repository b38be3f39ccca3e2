use serde::{Deserialize, Serialize};

use super::params::CoolerParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegenState {
    /// Matrix temperature before the cold-ward pass, K.
    pub t_r1: f64,
    /// Matrix temperature after the cold-ward pass, K.
    pub t_r2: f64,
}

/// Result of one pass of gas through the matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegenPass {
    /// Heat moved from gas to matrix (cold-ward) or matrix to gas (warm-ward), J.
    pub q: f64,
    pub regen: RegenState,
    /// Gas outlet temperature, K.
    pub t_out: f64,
}

fn c_min(gas_heat_cap: f64, p: &CoolerParams) -> f64 {
    gas_heat_cap.min(p.m_r_cpr)
}

/// Warm gas at `t_c` flows cold-ward and deposits heat in the matrix.
pub fn regen_cool(t_c: f64, regen: RegenState, gas_heat_cap: f64, p: &CoolerParams) -> RegenPass {
    let q = p.eps * c_min(gas_heat_cap, p) * (t_c - regen.t_r1);
    RegenPass {
        q,
        regen: RegenState {
            t_r1: regen.t_r1,
            t_r2: regen.t_r1 + q / p.m_r_cpr,
        },
        t_out: t_c - q / gas_heat_cap,
    }
}

/// Cold gas at `t_e` flows warm-ward and takes the stored heat back.
pub fn regen_return(t_e: f64, regen: RegenState, gas_heat_cap: f64, p: &CoolerParams) -> RegenPass {
    let q = p.eps * c_min(gas_heat_cap, p) * (regen.t_r2 - t_e);
    RegenPass {
        q,
        regen: RegenState {
            t_r1: regen.t_r2 - q / p.m_r_cpr,
            t_r2: regen.t_r2,
        },
        t_out: t_e + q / gas_heat_cap,
    }
}
