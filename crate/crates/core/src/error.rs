use thiserror::Error;

use crate::numeric::SolveError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid norm specification: {0}")]
    InvalidNorm(String),

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("level {level} out of range (ladder has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("lower frame inequality fails at level {level} (A = {lower:e})")]
    LowerFrameInequalityFails { level: usize, lower: f64 },

    #[error("frame is rank deficient: rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("biorthogonality violated: max |g_i(f_j) - delta_ij| = {0:e}")]
    BiorthogonalityViolated(f64),

    #[error("expansion identity fails: residual {0:e}")]
    ExpansionFails(f64),

    #[error("vector lies outside the norm's domain: {0}")]
    OutsideDomain(String),

    #[error("vanishing Fourier symbol: min |phi_hat| = {0:e}")]
    VanishingSymbol(f64),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Solve(#[from] SolveError),
}
