//! Error type shared by every module of the crate.

use crate::graph::Edge;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("arcs contain a directed cycle through vertex {0}")]
    Cyclic(usize),

    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),

    #[error("instance too large: {what} = {got}, limit {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("infeasible ordering constraints: {0}")]
    Infeasible(String),

    /// The graph is not chordal; `cycle` lists a chordless cycle of length at least 4.
    #[error("graph is not chordal (chordless cycle {cycle:?})")]
    NotChordal { cycle: Vec<usize> },

    #[error("graph must be connected with at least two vertices")]
    NotSeparable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("edge {0} is not an edge of the host graph")]
    EdgeNotInHost(Edge),

    /// No action cuts this edge with positive probability.
    #[error("edge {0} cannot be cut by any action")]
    UnreachableEdge(Edge),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("policy stalled: {0}")]
    Stalled(String),
}
