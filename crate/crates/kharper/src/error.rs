use thiserror::Error;

/// Errors reported by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} out of range for {n_q} qubits")]
    IndexOutOfRange { index: u64, n_q: usize },

    #[error("qubit index {qubit} out of range for {n_q} qubits")]
    QubitOutOfRange { qubit: usize, n_q: usize },

    #[error("state dimensions differ: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("multiplier {m} must be odd")]
    EvenMultiplier { m: u64 },

    #[error("hbar numerator rounded to zero; register too small for target")]
    HbarUnderflow,

    #[error("slice count must be at least 1")]
    ZeroSlices,

    #[error("pruning threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),

    #[error("localization fit failed: {0}")]
    FitFailure(String),

    #[error("distribution is empty or all-zero")]
    EmptyDistribution,

    #[error("mask selects no grid cells")]
    EmptyMask,

    #[error("requested {requested} qubits exceeds the {cap}-qubit simulation cap")]
    ResourceLimit { requested: usize, cap: usize },

    #[error("eigensolve did not converge")]
    EigensolveFailed,

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("no crossing bracketed: {0}")]
    NoCrossing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
