use std::path::PathBuf;

use thiserror::Error;

use crate::plant::PistonState;
use crate::sim::CalibrationResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a physical relation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter or configuration value that breaks an invariant.
    #[error("invalid `{key}`: {msg}")]
    Invalid { key: String, msg: String },

    #[error("piston overtravel: |x| = {:.6} m exceeds the cylinder length", .state.x.abs())]
    Overtravel { state: PistonState },

    #[error("nonphysical temperature {temperature} K")]
    NonPhysicalTemperature { temperature: f64 },

    /// A plant fault raised inside a scenario run, tagged with the simulated time.
    #[error("plant fault at t = {t:.3} s: {source}")]
    Fault {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no steady state after {cycles} cycles (last slope {last_slope:.3e} K/cycle)")]
    NonConvergence { cycles: u64, last_slope: f64 },

    #[error("calibration failed: residual {:.4} K after {} iterations", .best.residual, .best.iterations)]
    CalibrationFailed { best: Box<CalibrationResult> },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(key: &str, msg: impl Into<String>) -> Self {
        Error::Invalid {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    /// Strips any `Fault` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Fault { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_plant_fault(&self) -> bool {
        matches!(
            self.root(),
            Error::Overtravel { .. } | Error::NonPhysicalTemperature { .. } | Error::Domain(_)
        )
    }
}
