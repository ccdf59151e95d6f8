use thiserror::Error;

use crate::model::StateVector;

/// Errors raised anywhere in the benchmark.
#[derive(Debug, Error)]
pub enum Error {
    /// An input fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid parameters, limits, manifests or controller settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent disturbance scenario.
    #[error("scenario error: {0}")]
    Scenario(String),

    /// A controller slot produced unusable signals.
    #[error("controller error at step {step}: {msg}")]
    Controller { step: usize, msg: String },

    /// The stiff solver could not meet its tolerances.
    #[error("integration failure: {msg} (state: {state:?})")]
    Integration { msg: String, state: Box<StateVector> },

    /// The plant model produced a non-finite derivative.
    #[error("model error: {0}")]
    Model(String),

    /// Post-processing of a results log failed.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Scenario(_) => 3,
            Error::Controller { .. } => 4,
            Error::Integration { .. } | Error::Model(_) => 5,
            Error::Io { .. } => 6,
            Error::Evaluation(_) => 7,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
