use thiserror::Error;

/// Errors produced anywhere in the simulation and classification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown configuration kind `{0}`")]
    UnknownKind(String),

    #[error("unknown configuration `{0}`")]
    UnknownConfiguration(String),

    #[error("atom count {count} is invalid for `{kind}`")]
    AtomCount { kind: String, count: usize },

    #[error("index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("density matrix invariant violated at t = {time_ns} ns: {detail}")]
    Invariant { time_ns: u64, detail: String },

    #[error("probability {0} lies outside [0, 1]")]
    ProbabilityRange(f64),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
