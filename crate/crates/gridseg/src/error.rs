use thiserror::Error;

use crate::lp::LpError;
use crate::model::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported or missing field: {0}")]
    UnsupportedField(String),
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),
    #[error("plan infeasible ({family}): {message}")]
    PlanInfeasible { family: &'static str, message: String },
    #[error("attack is not ancestor-closed: {0}")]
    NotAncestorClosed(String),
    #[error("attacker MILP claims {milp:.6} MW but the operator re-solve gives {primal:.6} MW")]
    DualBoundViolation { milp: f64, primal: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("internal contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "PARSE_ERROR",
            Error::UnsupportedField(_) => "UNSUPPORTED_FIELD",
            Error::DanglingReference(_) => "DANGLING_REFERENCE",
            Error::InvalidInstance(_) => "INVALID_INSTANCE",
            Error::PlanInfeasible { .. } => "PLAN_INFEASIBLE",
            Error::NotAncestorClosed(_) => "NOT_ANCESTOR_CLOSED",
            Error::DualBoundViolation { .. } => "DUAL_BOUND_VIOLATION",
            Error::Lp(e) => e.code(),
            Error::Contract(_) => "INTERNAL_ERROR",
        }
    }

    /// True for errors caused by the caller's input rather than the solver.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UnsupportedField(_)
                | Error::DanglingReference(_)
                | Error::InvalidInstance(_)
                | Error::PlanInfeasible { .. }
                | Error::NotAncestorClosed(_)
        )
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, column, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
