use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An enumeration or representation guard was exceeded.
    #[error("resource limit: {what} requires {requested}, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    /// Randomized search ran out of candidates.
    #[error("search failed after {candidates} candidates (best eps {best_eps})")]
    SearchFailure { candidates: u64, best_eps: f64 },

    /// The greedy homogenization ran out of ground elements.
    #[error("guarantee failure at stage {stage}: ground set exhausted with |V| = {}", partial.len())]
    GuaranteeFailure { stage: usize, partial: Vec<u64> },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
