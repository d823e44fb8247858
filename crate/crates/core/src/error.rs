use thiserror::Error;

use crate::data::JoinValue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("relation is empty: relative frequencies are undefined")]
    EmptyRelation,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle budget exceeded: {required} pair comparisons needed, budget is {budget}")]
    OracleBudget { required: u128, budget: u64 },

    #[error("plan has no directive for join value {0}")]
    PlanCoverage(JoinValue),

    #[error("report carries no output digest; re-run with digest enabled")]
    MissingDigest,

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
