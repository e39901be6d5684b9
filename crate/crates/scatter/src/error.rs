//! Error taxonomy for the crate.
//!
//! Errors are split into three broad families that the CLI maps onto exit
//! codes: configuration / validation problems (exit 2), numerical failures
//! (exit 3) and verification failures (exit 4).

use thiserror::Error;

/// Everything that can go wrong while solving.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation before any numerics ran.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The Master equation has no matching solution for the supplied data
    /// (for instance `k^2 R^2 <= lambda^2`).
    #[error("no matching solution: {0}")]
    NoSolution(String),

    /// The Master equation produced a non-positive stage.
    #[error("negative stage: {0}")]
    NegativeStage(String),

    /// A quantity left the domain where the requested operation is defined
    /// (e.g. a local wave number squared went non-positive).
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// A root finder failed to bracket or converge.
    #[error("root finding failure: {0}")]
    RootFind(String),

    /// The asymptotic formulas were evaluated outside their regime.
    #[error("pre-asymptotic regime: {0}")]
    PreAsymptotic(String),

    /// The far-field point is not far enough out for phase extraction.
    #[error("not asymptotic: {0}")]
    NotAsymptotic(String),

    /// The reference integrator failed.
    #[error("oracle failure: {0}")]
    Oracle(String),

    /// A consistency check ran and failed.
    #[error("verification failure: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Io(_) => 2,
            Error::Verification(_) => 4,
            _ => 3,
        }
    }
}
