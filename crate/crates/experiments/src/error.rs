use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    /// Bad flags, bad config file, missing fields.
    #[error("usage: {0}")]
    Usage(String),

    /// A tester or runtime failed during a trial.
    #[error("trial {trial}: {source}")]
    Runtime {
        trial: u64,
        #[source]
        source: ptlab_core::Error,
    },

    /// An invariant of the harness itself was violated (adapter mismatch).
    #[error("check failed: {0}")]
    Check(String),

    #[error("input format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExpError {
    /// Process exit code: 1 for usage problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Usage(_) => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for ExpError {
    fn from(e: csv::Error) -> Self {
        ExpError::Format(e.to_string())
    }
}

pub type Result<T, E = ExpError> = std::result::Result<T, E>;
