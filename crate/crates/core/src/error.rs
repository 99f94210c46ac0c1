use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("classes live in different lattices")]
    LatticeMismatch,

    #[error("coefficient vector has length {got}, lattice rank is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("target is not in the rational span of the basis")]
    NotInSpan,

    #[error("basis vectors are linearly dependent")]
    DependentBasis,

    /// A caller-facing precondition failed; the message names the violated
    /// inequality or requirement.
    #[error("{0}")]
    Precondition(String),

    #[error("spheres {first} and {second} violate the C_n plumbing: {reason}")]
    InvalidConfig {
        first: usize,
        second: usize,
        reason: String,
    },

    #[error("rational blowdown hypothesis fails for basic class {class}: {detail}")]
    HypothesisViolation { class: String, detail: String },

    /// Two independent routes disagreed, or a ledger identity broke after an
    /// update.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    /// Internal failures (as opposed to bad input) map to a distinct CLI exit
    /// code.
    pub fn is_consistency(&self) -> bool {
        matches!(self, Error::Consistency(_) | Error::Overflow)
    }
}
