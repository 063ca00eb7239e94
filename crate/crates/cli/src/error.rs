use std::fmt::Display;

use thiserror::Error;

/// Command failure, split by who has to fix it.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config, unreadable or malformed data.
    #[error("{0}")]
    User(String),
    /// A bug or an invariant the tool itself should have upheld.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn user(e: impl Display) -> Self {
        CliError::User(e.to_string())
    }

    pub fn internal(e: impl Display) -> Self {
        CliError::Internal(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

macro_rules! user_errors {
    ($($t:ty),* $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::user(e)
            }
        })*
    };
}

user_errors!(
    mtprep_core::CorpusError,
    mtprep_core::NormalizeError,
    mtprep_core::FilterError,
    mtprep_core::AugmentError,
    mtprep_core::MetricError,
    mtprep_core::stats::StatsError,
    std::io::Error,
);

pub type CliResult<T> = Result<T, CliError>;
