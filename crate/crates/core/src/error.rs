use thiserror::Error;

use crate::tree::EvTree;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {min}..={max}")]
    Range {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected a {expected} factorization, got a {found} one")]
    AlphabetMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("factorization is not minimal: its product is not the full cycle")]
    NotMinimal,

    #[error("chords cross: the edge set does not embed in the disk without crossings")]
    CrossingChords,

    #[error("cannot assign {requested} labels on a tree with {available} vertices")]
    Capacity { requested: usize, available: usize },

    #[error("vertex {vertex} already carries label {existing}, cannot assign {attempted}")]
    LabelConflict {
        vertex: usize,
        existing: i64,
        attempted: i64,
    },

    #[error("trajectory {index} is not fully labelled yet; extend the run")]
    Unresolved { index: i64 },

    #[error("enumeration of size {n} exceeds the cap {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("walk towards label {label} exceeded the step budget of {steps}")]
    StepBudget {
        label: i64,
        steps: u64,
        partial: Box<EvTree<f64>>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn range(what: &'static str, value: i64, min: i64, max: i64) -> Self {
        Error::Range {
            what,
            value,
            min,
            max,
        }
    }

    /// Errors caused by exhausting a resource cap rather than by bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::EnumerationCap { .. } | Error::StepBudget { .. } | Error::Capacity { .. }
        )
    }
}
