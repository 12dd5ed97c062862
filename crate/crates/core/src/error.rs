use alloc::string::String;

use chrono::NaiveDate;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("bars and sentiment share no dates")]
    EmptyIntersection,
    #[error("dates must be strictly increasing (offending date {0})")]
    UnsortedDates(NaiveDate),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` has no values")]
    EmptyColumn(String),
    #[error("{what}: {actual} rows available, at least {required} required")]
    TooShort {
        what: &'static str,
        required: usize,
        actual: usize,
    },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid bar on {date}: {reason}")]
    InvalidBar { date: NaiveDate, reason: String },
    #[error("feature width mismatch: model expects {expected}, input has {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),
    #[error("unknown booster `{0}`")]
    UnknownBooster(String),
    #[error("poisson criterion requires nonnegative targets, found {0}")]
    NegativeTarget(f64),
    #[error("non-finite training loss at epoch {epoch} (last finite loss {last_loss})")]
    NonFiniteLoss { epoch: usize, last_loss: f64 },
    #[error("no prediction available for {0}")]
    MissingPrediction(NaiveDate),
    #[error("every grid candidate failed ({0} candidates)")]
    AllCandidatesFailed(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
