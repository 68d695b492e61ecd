use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum KeiError {
    /// The instance violates structural invariants; the payload lists them.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// An allocation breaks a feasibility rule of its instance.
    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    /// An operation requires a model class the instance does not belong to.
    #[error("model class mismatch: {0}")]
    ModelClass(String),

    /// A scheme was passed to an operation that does not support it.
    #[error("unsupported weight scheme: {0}")]
    UnsupportedScheme(String),

    /// A matching handed to a decoder does not cover every vertex.
    #[error("matching is not perfect: {0}")]
    NotPerfect(String),

    /// A variable assignment violates a constraint row of an integer program.
    #[error("assignment violates constraint {0}")]
    ConstraintViolated(String),

    /// The brute-force oracle refuses instances above its size cap.
    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    /// A caller-supplied argument is out of range or malformed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, KeiError>;
