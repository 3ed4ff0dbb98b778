use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polarization vector: {0}")]
    InvalidPolVec(String),

    #[error("quadrature degree {requested} exceeds the supported maximum {max}")]
    QuadratureDegreeTooHigh { requested: usize, max: usize },

    #[error("quadrature degree {have} is too low, at least {need} is required")]
    QuadratureDegreeTooLow { have: usize, need: usize },

    #[error("invalid photon distribution: {0}")]
    InvalidDistribution(String),

    #[error("failed to parse weight on line {line} of {path}: {reason}")]
    WeightParse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid sweep {0}")]
    InvalidSweep(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
