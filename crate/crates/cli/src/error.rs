use std::path::Path;

use thiserror::Error;
use topiceval_core::classic::ModelError;
use topiceval_core::coherence::CoherenceError;
use topiceval_core::cooccur::CooccurError;
use topiceval_core::divergence::DivergenceError;
use topiceval_core::embed::EmbedError;
use topiceval_core::textprep::TextError;

/// Every failure the command-line layer reports. The variant decides the
/// process exit code: 1 for usage errors, 2 for bad data, 3 for bugs.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown input format for '{0}'; pass --format dir|csv|jsonl")]
    UnknownFormat(String),
    #[error("cannot read '{path}': {reason}")]
    UnreadableInput { path: String, reason: String },
    #[error("{0}")]
    Data(String),
    #[error("no records to report")]
    EmptyRecords,
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::UnknownFormat(_) => 1,
            CliError::Internal(_) => 3,
            _ => 2,
        }
    }

    pub fn unreadable(path: &Path, reason: impl ToString) -> Self {
        CliError::UnreadableInput {
            path: path.display().to_string(),
            reason: reason.to_string(),
        }
    }
}

macro_rules! data_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

data_error_from!(
    TextError,
    CooccurError,
    CoherenceError,
    DivergenceError,
    ModelError,
    EmbedError,
    std::io::Error,
    csv::Error,
    serde_json::Error,
    toml::de::Error
);

pub type Result<T, E = CliError> = std::result::Result<T, E>;
