use crate::graph::NodeId;
use crate::ledger::StatementError;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed text input (edge lists, snapshots, configs, logs).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A caller violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A node id that is not part of the structure it was used with.
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    /// Exhaustive oracles refuse instances above their configured bound.
    #[error("instance has {nodes} nodes, exhaustive search is limited to {bound}")]
    TooLarge { nodes: usize, bound: usize },

    /// A ledger statement was rejected.
    #[error("statement rejected: {0}")]
    Rejected(#[from] StatementError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
