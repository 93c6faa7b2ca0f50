use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("numeric input error: {0}")]
    NumericInput(String),

    #[error("degenerate embedding for node {node}")]
    DegenerateEmbedding { node: String },

    #[error("encoder failed on node {node}: {reason}")]
    Encoder { node: String, reason: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("transfer error, mismatched tensors: {}", .0.join(", "))]
    Transfer(Vec<String>),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("clip format error in {path}: {reason}")]
    ClipFormat { path: PathBuf, reason: String },

    #[error("non-finite loss at epoch {epoch}, batch {batch}: {diagnostics}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        diagnostics: String,
    },

    #[error("clustering failed: {0}")]
    Clustering(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
