use thiserror::Error;

/// Errors raised by the geometry, assembly, counting and estimator layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Følner sequence is not monotone: set {index} is not contained in set {next}", next = index + 1)]
    NonMonotoneSequence { index: usize },

    #[error("Følner sequence is not tempered: sup ratio {ratio} exceeds bound {bound}")]
    NotTempered { ratio: f64, bound: f64 },

    #[error("negative potential {value} at vertex {vertex}")]
    NegativePotential { vertex: usize, value: f64 },

    #[error("random field window does not cover cell {cell:?}")]
    WindowTooSmall { cell: Vec<i64> },

    #[error("dense oracle requested for n = {n}, cap is {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("pivot breakdown at lambda = {lambda} (pivot {pivot:e} at row {row})")]
    PivotBreakdown { lambda: f64, row: usize, pivot: f64 },

    #[error("model has random components; the Bloch oracle needs a periodic model")]
    NotPeriodic,

    #[error("insufficient data: {usable} usable rows, at least {required} required")]
    InsufficientData { usable: usize, required: usize },
}

pub type Result<T, E = IdsError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> IdsError {
    IdsError::InvalidInput(msg.into())
}
