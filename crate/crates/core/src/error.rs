use thiserror::Error;

use crate::graph::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate adjacency entry {0} -> {1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("adjacency not symmetric for {0} -> {1}")]
    Asymmetric(Vertex, Vertex),
    #[error("stored degree of vertex {0} disagrees with its adjacency list")]
    DegreeMismatch(Vertex),
    #[error("expected two distinct vertices, got {0} twice")]
    SameVertex(Vertex),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing \"p edge\" header")]
    MissingHeader,
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColouringError {
    #[error("vertex {vertex} has colour {colour} outside every declared palette")]
    OutsidePalettes { vertex: Vertex, colour: u32 },
    #[error("palettes {0:?} and {1:?} overlap")]
    OverlappingPalettes(String, String),
    #[error("palette {name:?} has lo {lo} > hi {hi}")]
    InvalidPalette { name: String, lo: u32, hi: u32 },
    #[error("assignment mentions vertex {vertex} but the graph has {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("order is not a permutation of the vertex set")]
    NotAPermutation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("graph max degree {actual} exceeds configured delta {delta}")]
    DegreeExceedsDelta { actual: usize, delta: usize },
    #[error("scaled mode requires {0} to be set")]
    MissingScaledValue(&'static str),
    #[error("invalid value for {field}: {reason}")]
    InvalidValue { field: &'static str, reason: String },
}

/// Why a pipeline stage produced no usable output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error("{stage}: resampler timed out after {rounds} rounds")]
    Timeout { stage: &'static str, rounds: u64 },
    #[error("{stage}: re-verification failed: {details}")]
    Verification { stage: &'static str, details: String },
    #[error("configuration infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("delta must exceed 1, got {0}")]
    DeltaTooSmall(String),
    #[error("cannot parse delta {0:?}: expected an integer, a decimal such as 1e60, or e^X")]
    Parse(String),
}
