//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not unitary (max defect {defect:.3e})")]
    NonUnitary { defect: f64 },

    #[error("operators are incomparable: V†U has no entry above threshold")]
    Incomparable,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid pulse sequence: {0}")]
    InvalidSequence(String),

    #[error("sequence contains a gradient crusher and has no unitary representation")]
    NonUnitarySequence,

    #[error("preparation solver found no solution (residual {residual:.3e})")]
    NoSolution { residual: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("line fit is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("degenerate signal: max + min below threshold")]
    DegenerateSignal,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}
