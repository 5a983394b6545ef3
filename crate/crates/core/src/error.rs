use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("game `{0}` has no mean oracle")]
    MissingMeanOracle(String),

    #[error("iterate became non-finite at iteration {iteration}")]
    Divergence { iteration: u64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("unknown game `{0}`")]
    UnknownGame(String),

    #[error("compliance check failed: {0}")]
    Compliance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a malformed or inconsistent configuration,
    /// as opposed to failures while running.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidGame(_)
                | Error::UnknownAlgorithm(_)
                | Error::UnknownGame(_)
                | Error::InvalidPartition(_)
                | Error::DimensionMismatch { .. }
                | Error::Json(_)
        )
    }
}
