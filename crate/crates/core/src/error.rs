use thiserror::Error;

/// A weight vector that falls outside the feasible set of its expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("{expression} expects {expected} weights, found {found}")]
    Arity {
        expression: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("weight w_{index} = {value} is not finite")]
    NotFinite { index: usize, value: f64 },
    #[error("WMEAN weight w_{index} = {value} lies outside [0, 1]")]
    WmeanRange { index: usize, value: f64 },
    #[error("WMEAN weights must sum to 1, got {sum}")]
    WmeanSum { sum: f64 },
    #[error("{expression} weight w_{index} = {value} is below 1")]
    BelowOne {
        expression: &'static str,
        index: usize,
        value: f64,
    },
    #[error("MIXMINMAX weight w_min = {value} lies outside [0, 1]")]
    MixRange { value: f64 },
    #[error(
        "MIXMINMAX weights must satisfy w_max = 1 - w_min, got w_min = {w_min}, w_max = {w_max}"
    )]
    MixComplement { w_min: f64, w_max: f64 },
}

impl Violation {
    /// 1-based index of the offending weight, where one exists.
    pub fn index(&self) -> Option<usize> {
        match self {
            Violation::NotFinite { index, .. }
            | Violation::WmeanRange { index, .. }
            | Violation::BelowOne { index, .. } => Some(*index),
            Violation::MixRange { .. } => Some(1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RnmError {
    #[error("invalid weights: {0}")]
    Weights(#[from] Violation),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("enumeration needs {required} sample combinations, the cap is {cap}")]
    Resource { required: u128, cap: u64 },
    #[error("no sign change of the signed difference on [0, 1] ({} scan points)", profile.len())]
    RootNotFound { profile: Vec<(f64, f64)> },
}

pub type Result<T, E = RnmError> = std::result::Result<T, E>;

pub(crate) fn argument(msg: impl Into<String>) -> RnmError {
    RnmError::Argument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> RnmError {
    RnmError::Domain(msg.into())
}
