//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("duplicate relation {0}")]
    DuplicateRelation(String),
    #[error("relation {relation} has arity {expected}, found {found} terms")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid tgd: {0}")]
    InvalidTgd(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("substitution is not an active trigger: {0}")]
    NotActiveTrigger(String),
    #[error("chase failure: cannot equate constants {0} and {1}")]
    ChaseFailure(String, String),
    #[error("no homomorphism from the premise into the policy instance")]
    NoHomomorphism,
    #[error("no candidates to choose from")]
    EmptyCandidates,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k = {k} exceeds the {n} training measurements")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("infeasible scenario config: {0}")]
    InfeasibleConfig(String),
    #[error("invalid seed {0:?}: expected an unsigned integer")]
    InvalidSeed(String),
    #[error("malformed training data: {0}")]
    Training(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
