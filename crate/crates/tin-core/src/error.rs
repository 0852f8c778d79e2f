use thiserror::Error;

/// Error type shared across the crate.
///
/// The coarse categories map onto the CLI exit codes: `Input`, `Graph` and
/// `Data` are problems with what the caller handed us (exit 2), `Method` is a
/// runtime failure of an algorithm on otherwise valid input (exit 3).
#[derive(Debug, Error)]
pub enum TinError {
    #[error("graph error: {0}")]
    Graph(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("method failure: {0}")]
    Method(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TinError>;

impl TinError {
    pub fn graph(msg: impl Into<String>) -> Self {
        TinError::Graph(msg.into())
    }
    pub fn input(msg: impl Into<String>) -> Self {
        TinError::Input(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        TinError::Data(msg.into())
    }
    pub fn method(msg: impl Into<String>) -> Self {
        TinError::Method(msg.into())
    }
}
