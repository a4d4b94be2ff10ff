//! Sketch sizing, approximation error, ranking quality and label-skew
//! analysis.

mod eval;
mod sizing;
mod skew;

use thiserror::Error;

use crate::solver::SolverError;

pub use eval::{approximation_error, mrr, write_ranks_csv, EvalResult};
pub use sizing::{tail_bound_size, size_sketch, point_query_size, SizingRegime, SizingSpec, SketchSize};
pub use skew::{skew_report, tail_weight, tail_weight_values, write_skew_csv, Aggregation, SkewReport};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("states do not match: {0}")]
    Mismatch(String),
    #[error("state has no positive scores")]
    AllZero,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> MetricsError {
    MetricsError::InvalidParameter { field, reason: reason.into() }
}
