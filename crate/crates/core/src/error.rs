use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid measurement basis: {0}")]
    InvalidBasis(String),

    #[error("probabilities sum to {sum}, drift exceeds tolerance")]
    NormalizationDrift { sum: f64 },

    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("Hamiltonian is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("dissipator {index} has negative rate {rate}")]
    NegativeRate { index: usize, rate: f64 },

    #[error("Kraus operators at t = {t} are not complete (deviation {deviation:e})")]
    KrausIncomplete { t: f64, deviation: f64 },

    #[error("matrix exponential failed: {0}")]
    ExpmFailed(String),

    #[error("evolution output violates state invariants: {0}")]
    PropagatorDefect(String),

    #[error("invalid time {0}")]
    InvalidTime(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not converge for entry ({i}, {j}): estimate {estimate}, error bound {error_bound:e}"
    )]
    Quadrature {
        i: usize,
        j: usize,
        estimate: f64,
        error_bound: f64,
    },

    #[error("renewal system is singular; states {disconnected:?} never reach the target")]
    Singular { disconnected: Vec<usize> },

    #[error(
        "trajectory from state {start} did not detect target {target} within {cap} measurements (likely disconnected)"
    )]
    MeasurementCap {
        start: usize,
        target: usize,
        cap: u64,
    },
}
