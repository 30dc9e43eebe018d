//! Error type shared by the laboratory.
//!
//! Numerical *terminations* that are part of a result's meaning (an orbit
//! escaping the ball, a corrector giving up mid-trajectory) are not errors;
//! they are recorded on the result itself. `Error` is reserved for inputs the
//! operations cannot accept and for computations that failed to produce a
//! result at all.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown system `{0}` (catalog: free_particle, l4_linear, cherry, variation_like)")]
    UnknownSystem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("root finder did not converge after {iters} iterations (last update {last_update:e})")]
    RootFinderDivergence { iters: usize, last_update: f64 },

    #[error("no section return within t = {t_cap} (period cap exceeded)")]
    NoReturn { t_cap: f64 },

    #[error("amplitude {amplitude} is outside the oscillation range: {reason}")]
    AmplitudeOutOfRange { amplitude: f64, reason: String },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("trajectory terminated by {0} before the requested span was covered")]
    EarlyTermination(String),
}
