//! Error type shared across the crate.
//!
//! Guard violations (desk-scale caps being exceeded) are split out from
//! ordinary failures so the CLI can map them to a distinct exit code.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("{0}")]
    Data(String),

    #[error("no samples")]
    NoSamples,

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch n={expected} vs n={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate covariance: eigenvalue {eigenvalue:.3e} below floor {floor:.3e}")]
    DegenerateCovariance { eigenvalue: f64, floor: f64 },

    #[error("insufficient start value: |g(u0)| = {value:.3e} below eta = {eta:.3e}")]
    InsufficientStart { value: f64, eta: f64 },

    #[error("insufficient positive mass: {count} positive samples")]
    InsufficientPositives { count: usize },

    #[error("{what} did not converge after {iters} iterations (best estimate {best:.6e})")]
    NonConvergence { what: String, iters: usize, best: f64 },

    /// Desk-scale guard tripped; the CLI reports these with exit code 2.
    #[error("guard violation: {what} ({actual} exceeds limit {limit})")]
    Guard {
        what: String,
        limit: u64,
        actual: u64,
    },

    #[error("evaluator failure at probe {probe:?}: {msg}")]
    Evaluator { probe: Vec<f64>, msg: String },

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
