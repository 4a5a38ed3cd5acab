use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing dataset file: {0}")]
    MissingFile(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("feature row {row} has {got} columns, expected {expected}")]
    RaggedFeatures {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("label {label} of node {node} is out of range (num_classes = {num_classes})")]
    LabelOutOfRange {
        node: usize,
        label: i64,
        num_classes: usize,
    },

    #[error("node index {index} out of bounds (num_nodes = {num_nodes})")]
    NodeOutOfBounds { index: usize, num_nodes: usize },

    #[error("split masks overlap at node {0}")]
    OverlappingSplits(usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("duplicate candidate node {0}")]
    DuplicateCandidate(usize),

    #[error("k = {k} exceeds ground set size {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("ground set of {n} items exceeds the enumeration limit {limit}")]
    TooLargeForEnumeration { n: usize, limit: usize },

    #[error("dark world of {n} nodes exceeds the global DPP limit {limit}; use the DFS sampler")]
    GlobalDppTooLarge { n: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite {what} at epoch {epoch}")]
    Diverged { what: &'static str, epoch: usize },

    #[error("empty mask")]
    EmptyMask,

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("could not generate a connected graph after {0} attempts")]
    NotConnected(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
