use thiserror::Error;

use crate::data::PiecewiseLinearPath;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Solver,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate design: column {column} is (numerically) dependent on the others ({detail})")]
    DegenerateDesign { column: usize, detail: String },

    #[error("column {column} has zero variance after centering")]
    ZeroVariance { column: usize },

    #[error("column {column} is empty or constant: {detail}")]
    DegenerateColumn { column: usize, detail: String },

    #[error("tied knots at positions {first} and {second}")]
    TiedKnots { first: usize, second: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("value {value} outside [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("NNLS solver stalled after {pivots} active-set pivots")]
    SolverStall { pivots: usize },

    #[error("step budget of {steps} exhausted before the path terminated")]
    StepBudget {
        steps: usize,
        partial: Box<PiecewiseLinearPath>,
    },

    #[error("observation {observation} has curvature {weight:e}; reduce the step size")]
    CurvatureDegeneracy { observation: usize, weight: f64 },

    #[error("loss increased by {increase:e} even at step size {step:e}")]
    StepSize { step: f64, increase: f64 },

    #[error("check budget exceeded: {estimated} signed subsets (limit {limit})")]
    BudgetExceeded { estimated: u128, limit: u128 },

    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::BudgetExceeded { .. } | Error::Range { .. } => {
                ErrorCategory::Config
            }
            Error::ZeroVariance { .. }
            | Error::DegenerateColumn { .. }
            | Error::TiedKnots { .. }
            | Error::Dimension(_)
            | Error::NonFinite(_)
            | Error::Domain(_)
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Json(_) => ErrorCategory::Data,
            Error::DegenerateDesign { .. }
            | Error::SolverStall { .. }
            | Error::StepBudget { .. }
            | Error::CurvatureDegeneracy { .. }
            | Error::StepSize { .. } => ErrorCategory::Solver,
            Error::InternalConsistency(_) => ErrorCategory::Internal,
        }
    }
}
