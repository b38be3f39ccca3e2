//! Lumped model of a linear-motor Stirling cryocooler.
//!
//! The pieces are free functions over plain `Copy` state so they can be
//! tested one at a time; [`cycle_step`] sequences them into one drive period.

mod cycle;
mod gas;
mod params;
mod piston;
mod regen;

pub use cycle::{
    base_load_heat, chamber_energy_step, cycle_step, heat_rejection, CoolerState, TelemetrySample,
};
pub use gas::{ideal_gas_moles, ideal_gas_pressure, isentropic_dpdt, work_rate, ChamberGas};
pub use params::{CoolerParams, GAMMA, MOLAR_MASS_HE, SUBSTEPS_PER_QUARTER};
pub use piston::{piston_step, PistonState};
pub use regen::{regen_cool, regen_return, RegenPass, RegenState};
