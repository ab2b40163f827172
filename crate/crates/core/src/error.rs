use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// Λ_c = 0 makes the reduced coupling λ = (Λ − Λ_c)/|Λ_c| undefined.
    #[error("critical coupling is zero (W = 2√Jᵃ); reduced coupling is undefined")]
    CriticalPointZero,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operator is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("operators do not commute at t = 0 (‖[A, B]‖ = {0:.3e})")]
    NonCommuting(f64),

    #[error("initial state is not a +1 eigenstate of σx (residual {0:.3e})")]
    NotSigmaXEigenstate(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension {dim} exceeds the cap of {cap} for the O(D³) reference path")]
    TooLarge { dim: usize, cap: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("no local minimum found before t_max = {t_max:.6e}")]
    NoMinimum { t_max: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cache format error: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
