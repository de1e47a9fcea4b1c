use thiserror::Error;

/// Errors raised by the simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("negative variance {0:e} exceeds rounding tolerance")]
    NegativeVariance(f64),

    #[error("fringe node: phase-resolution denominator {0:e} vanishes")]
    FringeNode(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: {what} has {actual} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("time {t:e} s lies outside the sequence window [0, {total:e}] s")]
    OutsideWindow { t: f64, total: f64 },

    #[error("no contiguous range reaches threshold {0}")]
    EmptyRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
