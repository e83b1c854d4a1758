use thiserror::Error;

/// Errors produced by the numeric core and the protocol layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("state vector is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("classification is the same at both ends of [{lo}, {hi}]; nothing to bisect")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("transcript was produced by an honest committer; there is nothing to steer")]
    HonestTranscript,

    #[error("transcript has not been opened yet")]
    NotOpened,
}

pub type Result<T> = std::result::Result<T, Error>;
