use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid-parameter: {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("incompatible-extent: {0}")]
    IncompatibleExtent(String),

    #[error("capacity: L_y={ly} exceeds the limit of {limit} for {what}")]
    Capacity {
        ly: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid-momentum: {0}")]
    InvalidMomentum(String),

    #[error("numerical-failure in block k_y index {block} (L_y={ly}): {reason}")]
    NumericalFailure {
        ly: usize,
        block: usize,
        reason: String,
    },

    #[error("empty spectra")]
    EmptySpectra,

    #[error("undefined-for-odd: periodicity in k_y+pi needs even L_y, got {0}")]
    UndefinedForOdd(usize),

    #[error("branch unavailable: k_x={branch} at L_y={ly}")]
    BranchUnavailable { branch: &'static str, ly: usize },

    #[error("non-finite curve: epsilon is infinite at L_y={ly}, k_y index {k_index}")]
    NonFiniteCurve { ly: usize, k_index: usize },

    #[error("insufficient-samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("oracle size cap: {0}")]
    OracleSizeCap(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code for this error: 2 for invalid input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalFailure { .. } => 3,
            _ => 2,
        }
    }
}
