use director_core::{ParamError, StepError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key = value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}")]
    BadValue { key: &'static str, value: String },
    #[error("{0}")]
    Preset(String),
    #[error("no preset given")]
    MissingPreset,
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("step {step} (t = {time:.6}) failed after retry: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: StepError,
    },
    #[error("initial state: {0}")]
    Init(#[source] StepError),
    #[error("I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Step { .. } | RunError::Init(_) => 3,
            RunError::Io { .. } => 4,
        }
    }
}
