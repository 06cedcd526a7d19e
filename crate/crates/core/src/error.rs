use alloc::string::String;

/// Errors raised by the walk kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge {
        u: usize,
        v: usize,
        reason: &'static str,
    },

    #[error("index {index} out of range for {len} vertices")]
    OutOfRange { index: usize, len: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    /// A state would not fit the configured amplitude budget.
    #[error("{what} needs {required} amplitudes but the budget is {available}")]
    Resource {
        what: &'static str,
        required: u128,
        available: u128,
    },

    #[error("numerical failure: achieved residual {residual:e}")]
    Numerical { residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("incompatible distributions: {0}")]
    Incompatible(String),
}

pub type Result<T, E = WalkError> = core::result::Result<T, E>;
