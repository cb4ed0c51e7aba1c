use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("observation {index}: {reason}")]
    InvalidObservation { index: usize, reason: String },

    #[error("missing expert information: {0}")]
    Configuration(String),

    /// The censoring survival `1 - G(W-)` vanished at an observation that
    /// carries weight, i.e. the estimator was evaluated beyond the
    /// identifiable region.
    #[error("degenerate inverse-censoring weight at observation {index} (W = {w}): 1 - G(W-) = {denominator:e}")]
    DegenerateWeight { index: usize, w: f64, denominator: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn obs(index: usize, reason: impl Into<String>) -> Self {
        Error::InvalidObservation {
            index,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::InvalidObservation { .. }
            | Error::Configuration(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::DegenerateWeight { .. } | Error::DegenerateFit(_) | Error::Numeric(_) => 3,
            Error::Io(_) => 1,
        }
    }
}
