use thiserror::Error;

/// Errors produced by the channel toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix data has {found} entries, expected {rows}x{cols}")]
    BadShape {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (lambda_min {lambda_min:.3e})")]
    NotPsd { lambda_min: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(
        "family is not commuting: members {first} and {second} have relative commutator {residual:.3e}"
    )]
    NotCommutingFamily {
        first: usize,
        second: usize,
        residual: f64,
    },
    #[error(
        "joint diagonalization failed: member {index} keeps off-diagonal residual {residual:.3e}"
    )]
    DiagonalizationFailure { index: usize, residual: f64 },
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("Kraus operator {index} is not rank one (sigma2/sigma1 = {ratio:.3e})")]
    NotRankOne { index: usize, ratio: f64 },
    #[error("input operator {what} is not positive semidefinite (lambda_min {lambda_min:.3e})")]
    NotPsdInput { what: String, lambda_min: f64 },
    #[error("channel range is not commutative (worst relative commutator {residual:.3e})")]
    NotCommutativeRange { residual: f64 },
    #[error("certification failed: {invariant} (residual {residual:.3e})")]
    CertificationFailure { invariant: String, residual: f64 },
    #[error("subspace is not self-adjoint (rank {rank} grows to {closure_rank} under adjoints)")]
    NotSelfAdjoint { rank: usize, closure_rank: usize },
    #[error("generator {index} is not trace-zero (|trace| = {trace:.3e})")]
    NotTraceZero { index: usize, trace: f64 },
    #[error("operator is not a projection (idempotence {idempotence:.3e}, hermiticity {hermiticity:.3e})")]
    NotProjection { idempotence: f64, hermiticity: f64 },
    #[error("invalid tolerances: {0}")]
    BadTolerances(String),
    #[error("Kraus sequence length {len} outside 1..={cap}")]
    KrausCount { len: usize, cap: usize },
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
