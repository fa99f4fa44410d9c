use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A truncated series failed to meet its stopping rule. The last
    /// partial sum is carried so callers can inspect how far the
    /// summation got.
    #[error("series stopping rule not met after {terms} terms (last partial sum {partial})")]
    Convergence { terms: usize, partial: Complex64 },

    /// Two expansions with incompatible measure parameters were combined.
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),

    /// The input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
