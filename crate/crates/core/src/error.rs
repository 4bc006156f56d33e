use thiserror::Error;

/// Snapshot of an algorithm run that hit its round budget before terminating.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRun {
    pub rounds: u64,
    pub total_pulls: u64,
    /// Row-major N×K pull counts.
    pub per_arm_pulls: Vec<u64>,
    /// 0-based indices of groups still active.
    pub active_groups: Vec<usize>,
    /// 0-based indices of groups accepted so far (empty for single-answer algorithms).
    pub accepted: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} index {} out of range (size {len})", index + 1)]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error(
        "best group is not unique: groups {} and {} both reach weighted efficiency {value}",
        first + 1,
        second + 1
    )]
    NonUniqueOptimum {
        first: usize,
        second: usize,
        value: f64,
    },

    #[error("instance generation failed after {attempts} attempts: {diagnostics}")]
    GenerationFailed { attempts: u64, diagnostics: String },

    #[error("round budget of {max_rounds} exhausted after {} pulls", partial.total_pulls)]
    BudgetExhausted {
        max_rounds: u64,
        partial: Box<PartialRun>,
    },

    #[error("no threshold: predicate does not flip within [{lo}, {hi}]")]
    NoThreshold { lo: f64, hi: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short stable identifier, used for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidTensor(_) => "invalid_tensor",
            Error::NonUniqueOptimum { .. } => "non_unique_optimum",
            Error::GenerationFailed { .. } => "generation_failed",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::NoThreshold { .. } => "no_threshold",
            Error::Internal(_) => "internal",
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
