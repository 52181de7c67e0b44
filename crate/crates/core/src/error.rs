use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("plant document could not be parsed: {0}")]
    Parse(String),

    /// A plant, scenario or argument failed validation. `location` names the
    /// offending cell or field.
    #[error("invalid {location}: {reason}")]
    Validation { location: String, reason: String },

    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("singular matrix in {context}")]
    SingularMatrix { context: String },

    #[error("array role mismatch: expected {expected}, found {found}")]
    RoleMismatch { expected: String, found: String },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("no viable pairing: every matching contains a non-positive element")]
    NoViablePairing,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("simulation diverged at t = {time} s ({what})")]
    Divergence { time: f64, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(location: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            location: location.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn singular(context: impl Into<String>) -> Self {
        Error::SingularMatrix {
            context: context.into(),
        }
    }
}
