//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by evaluation, simulation, iteration and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A time at or beyond the blowup time was supplied.
    #[error("time {t} is not before the blowup time {t_star}")]
    PastBlowup { t: f64, t_star: f64 },

    /// A point outside the shrinking domain was supplied.
    #[error("point ({x0}, {x1}, {x2}) lies outside the domain at time {t}")]
    OutsideDomain { t: f64, x0: f64, x1: f64, x2: f64 },

    /// The cylindrical inverse was requested on the symmetry axis.
    #[error("cylindrical components are undefined on the axis r = 0")]
    OnAxis,

    /// Parameter validation failed; every violated constraint is listed.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// An argument was outside the accepted range of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An exact-arithmetic operation left the rationals.
    #[error("not representable in exact arithmetic: {0}")]
    NotExact(String),

    /// The time integrator detected growth beyond the abort threshold.
    #[error("solver diverged at tau = {tau}: norm {norm:e} exceeds {limit:e}")]
    Diverged { tau: f64, norm: f64, limit: f64 },

    /// An iterative routine did not reach its tolerance.
    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { iterations: usize, what: String },

    /// A decay fit could not be computed on the requested window.
    #[error("degenerate fit window: {0}")]
    DegenerateFit(String),

    /// Configuration parsing or schema validation failed.
    #[error("configuration error: {0}")]
    Config(String),

    /// A snapshot or series file is malformed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
