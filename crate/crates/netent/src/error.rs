use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("total dimension {0} exceeds supported maximum {1}")]
    DimLimit(usize, usize),
    #[error("invalid hypergraph: {0}")]
    Graph(String),
    #[error("hypergraph is disconnected")]
    Disconnected,
    #[error("exact search limited to {limit} nodes, got {n}")]
    SearchLimit { n: usize, limit: usize },
    #[error("linear program error: {0}")]
    Lp(String),
    #[error("infeasible program")]
    Infeasible,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
