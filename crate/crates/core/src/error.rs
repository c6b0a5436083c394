use thiserror::Error;

/// Errors raised by state algebra, measures and the roof optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate state: amplitude vector has zero norm")]
    DegenerateState,

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("amplitude count {found} does not match product of dims {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("operator on site {site} has shape {rows}x{cols}, expected {dim}x{dim}")]
    ShapeMismatch {
        site: usize,
        dim: usize,
        rows: usize,
        cols: usize,
    },

    #[error("{op} requires dims {expected:?}, got {found:?}")]
    WrongDims {
        op: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("Kraus set is not complete (deviation {0:.3e})")]
    IncompleteKraus(f64),

    #[error("ensemble length {length} is below the rank {rank} of the target")]
    EnsembleTooShort { length: usize, rank: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter combination gives the zero vector")]
    ZeroNorm,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
