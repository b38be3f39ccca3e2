//! Lumped-parameter simulator of a linear-motor Stirling cryocooler with
//! digital 1-DOF and 2-DOF PI cold-tip temperature control.

// `!(x > 0.0)` guards are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod control;
pub mod error;
pub mod plant;
pub mod sim;

pub use error::{Error, Result};
