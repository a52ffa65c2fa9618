use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({u}, {v}) references a node outside 0..{num_nodes}")]
    EdgeOutOfRange { u: usize, v: usize, num_nodes: usize },

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("node id {id} is not valid for a graph with {num_nodes} nodes")]
    UnknownNode { id: usize, num_nodes: usize },

    #[error("duplicate node id {0} in node set")]
    DuplicateNode(usize),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("empty node set: {0}")]
    EmptyNodeSet(&'static str),

    #[error("node {0} has no labeled ground truth")]
    MissingLabel(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("attack-{attack} requires knowledge the attacker does not have: {missing}")]
    Taxonomy { attack: u8, missing: &'static str },

    #[error("cannot split: community of {size} nodes exceeds {limit} of {total}")]
    Unsplittable {
        size: usize,
        limit: usize,
        total: usize,
    },

    #[error("node {0} has no attacker neighbour within two hops")]
    NoKnownNeighbour(usize),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{file}:{line}: malformed line: {reason}")]
    Malformed {
        file: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{file}:{line}: id {id} out of range (limit {limit})")]
    IdOutOfRange {
        file: PathBuf,
        line: usize,
        id: usize,
        limit: usize,
    },

    #[error("{what} count mismatch: meta.json says {expected}, found {found}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a description of the run that raised it.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error beneath any [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
