use std::path::PathBuf;

use thiserror::Error;

use crate::graph::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {}", describe(.0))]
    InvalidGraph(Vec<Violation>),

    #[error("invalid DFS code at tuple {index}: {reason}")]
    InvalidCode { index: usize, reason: String },

    #[error("canonization frontier exceeded {cap} states; augment labels with vertex invariants")]
    FrontierCapExceeded { cap: usize },

    #[error("graph has {nodes} nodes, brute-force cap is {cap}")]
    CapExceeded { nodes: usize, cap: usize },

    #[error("empty dataset: {0}")]
    EmptyDataset(&'static str),

    #[error("out of vocabulary: {0}")]
    OutOfVocab(String),

    #[error("component index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{0}")]
    Precondition(String),

    #[error("model produced only empty sequences ({attempts} attempts)")]
    ResampleCapExceeded { attempts: usize },

    #[error("descriptor kind mismatch: {0}")]
    KindMismatch(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("graph {index}: {}", describe(.violations))]
    Validation { index: usize, violations: Vec<Violation> },

    #[error("need at least one training graph, got {0} graphs")]
    TooFewGraphs(usize),

    #[error("checkpoint format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("checkpoint checksum mismatch (file truncated or corrupted)")]
    ChecksumMismatch,

    #[error("not a checkpoint file (bad magic)")]
    BadMagic,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

fn describe(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
