use std::path::PathBuf;

use fngcast_core::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fngcast_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("duplicate date {date} on line {line}")]
    DuplicateDate { date: NaiveDate, line: u64 },
    #[error("fear & greed entry {index}: {message}")]
    SentimentEntry { index: usize, message: String },
    #[error("invalid JSON in {what}: {source}")]
    Json {
        what: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Config(String),
    #[error("HTTP request to {url} failed after {attempts} attempt(s): {message}")]
    Http {
        url: String,
        attempts: usize,
        status: Option<u16>,
        message: String,
    },
    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(what: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            what: what.into(),
            source,
        }
    }

    /// 2 for bad input or usage, 1 for failures inside a well-formed run.
    pub fn exit_code(&self) -> u8 {
        use fngcast_core::Error as C;
        match self {
            Error::Http { .. } | Error::Write { .. } | Error::Internal(_) => 1,
            Error::Core(C::NonFiniteLoss { .. } | C::AllCandidatesFailed(_)) => 1,
            _ => 2,
        }
    }
}
