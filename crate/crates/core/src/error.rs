use thiserror::Error;

use crate::rational::Rational;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probabilities sum to {sum}, not 1")]
    SumNotOne { sum: Rational },

    #[error("atom {value} has non-positive probability {prob}")]
    NonPositiveProb { value: Rational, prob: Rational },

    #[error("value {value} appears more than once")]
    DuplicateValue { value: Rational },

    #[error("distribution has no atoms")]
    Empty,

    #[error("distribution has zero variance")]
    ZeroVariance,

    #[error("distribution has mean {mean}, expected exactly 0")]
    NonZeroMean { mean: Rational },

    #[error("exact convolution would need about {projected} atoms (budget {budget}); use lattice-float mode")]
    ExactBudgetExceeded { projected: u128, budget: u128 },

    #[error("lattice would need {cells} cells (budget {budget})")]
    LatticeBudgetExceeded { cells: u128, budget: u128 },

    #[error("k = {k} is outside 0..={n}")]
    KOutOfRange { k: i64, n: u64 },

    #[error("adaptive quadrature did not reach tolerance {tol:e} within {evaluations} evaluations")]
    NonConvergence { tol: f64, evaluations: usize },

    #[error("eta = {eta:e} would need more than {max_cells} quantizer cells")]
    EtaTooSmallForBudget { eta: f64, max_cells: usize },

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl Error {
    /// True for errors that mean "the request is valid but too large".
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::ExactBudgetExceeded { .. }
                | Error::LatticeBudgetExceeded { .. }
                | Error::EtaTooSmallForBudget { .. }
                | Error::NonConvergence { .. }
        )
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { field, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
