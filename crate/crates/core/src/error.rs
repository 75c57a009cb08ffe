use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("basis component out of range: {0}")]
    OutOfBounds(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("not a valid state vector: {0}")]
    InvalidState(String),

    #[error(
        "coherent state with alpha = {alpha} truncated at n_max = {cutoff} loses {deficit:.3e} \
         of its weight; n_max >= {required} is required"
    )]
    Truncation {
        alpha: Complex64,
        cutoff: usize,
        deficit: f64,
        required: usize,
    },

    #[error("degenerate charger state: {0}")]
    DegenerateState(String),

    #[error("charger {kind} needs {expected} mode(s) but {found} were given")]
    IncompatibleCharger {
        kind: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("Hamiltonian entry ({row}, {col}) couples excitation sectors {from} and {to}")]
    SectorLeak {
        row: usize,
        col: usize,
        from: usize,
        to: usize,
    },

    #[error("eigensolver failed in excitation sector {sector}: {reason}")]
    Eigensolve { sector: usize, reason: String },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invariant violated at t = {t}: {what}")]
    Invariant { t: f64, what: String },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
