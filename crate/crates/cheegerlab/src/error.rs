use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} of the transition matrix sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("negative transition probability at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },

    #[error("the support graph of the kernel is not strongly connected")]
    NotIrreducible,

    #[error("kernel is not reversible (detailed balance residual {residual})")]
    NotReversible { residual: f64 },

    #[error("kernel is not lazy: diagonal entry {value} at state {state} is below 1/2")]
    NotLazy { state: usize, value: f64 },

    #[error("{n} states exceeds the exhaustive-enumeration cap of {cap}")]
    TooManyStates { n: usize, cap: usize },

    #[error("no positive transition probability in the scanned index set")]
    NoPositiveEntry,

    #[error("shape function vanishes at pi(A) = {measure}")]
    ZeroDenominator { measure: f64 },

    #[error("eigensolve did not converge: {0}")]
    EigensolveFailed(String),

    #[error("inconsistent parameters: {0}")]
    InconsistentParams(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("shape function must have concave f and concave f''")]
    ConcavityRequired,

    #[error("no subset B matches the required stationary measure for any admissible A")]
    NoFeasibleB,

    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("kernel file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
