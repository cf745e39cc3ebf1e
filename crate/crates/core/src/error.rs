use std::fmt;

use crate::complex::Simplex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Topology,
    Numerical,
    Io,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "inconsistent filtration: face {face} has value {face_value} above coface {coface} with value {coface_value}"
    )]
    InconsistentFiltration {
        face: Simplex,
        face_value: f64,
        coface: Simplex,
        coface_value: f64,
    },

    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("no feature in dimension {0}")]
    NoFeature(usize),

    #[error("parameter {epsilon} lies outside the bar lifetime [{birth}, {death})")]
    OutsideLifetime {
        epsilon: f64,
        birth: f64,
        death: f64,
    },

    #[error(
        "representative is not a cocycle at {epsilon} (nonzero on {witness}); recompute with a representative valid at this parameter"
    )]
    NotACocycle { epsilon: f64, witness: Simplex },

    #[error("cochain is not a cocycle: coboundary is {value} on {witness}")]
    CocycleCondition { witness: Simplex, value: i64 },

    #[error("lift failed over prime {prime} (integer coboundary {value} on {witness}); choose a different prime")]
    LiftFailed {
        prime: u32,
        witness: Simplex,
        value: i64,
    },

    #[error("no significant simplices remain")]
    NothingLeft,

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite {
        what: &'static str,
        iteration: usize,
    },

    #[error(
        "homotopy guard violated at iteration {iteration}: displacement {displacement} >= {bound}"
    )]
    GuardViolation {
        iteration: usize,
        displacement: f64,
        bound: f64,
    },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidInput(_) | Error::NotPrime(_) | Error::OutsideLifetime { .. } => {
                ErrorCategory::Usage
            }
            Error::InconsistentFiltration { .. } => ErrorCategory::Usage,
            Error::NoFeature(_)
            | Error::NotACocycle { .. }
            | Error::CocycleCondition { .. }
            | Error::LiftFailed { .. }
            | Error::NothingLeft => ErrorCategory::Topology,
            Error::NonFinite { .. } | Error::GuardViolation { .. } | Error::Degenerate(_) => {
                ErrorCategory::Numerical
            }
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => ErrorCategory::Io,
        }
    }

    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidInput(msg.to_string())
    }
}
