use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Fewer than two distinct locations, so the variance is zero.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("invalid weight {weight} at location {location}")]
    InvalidWeight { location: f64, weight: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no crossing of the unit SFR level on [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("infeasible three-point configuration: {0}")]
    Infeasible(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
