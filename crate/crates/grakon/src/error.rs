use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input; the message names the offending token.
    #[error("parse error: {0}")]
    Parse(String),
    /// A graph violating a structural invariant (tadpole, duplicate edge,
    /// out-of-range vertex, sink with an outgoing edge, ...).
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    /// An operation that requires homogeneous input (same vertex/edge/sink
    /// counts across all terms) was fed a mixed sum.
    #[error("inhomogeneous sum: {0}")]
    Inhomogeneous(String),
    /// A multivector operation received a sum in which some sink does not
    /// have in-degree exactly one.
    #[error("not a multivector: {0}")]
    NotMultivector(String),
    /// Mismatched dimensions or argument counts.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Input that had to be a d-cocycle is not one.
    #[error("not a cocycle: {0}")]
    NotCocycle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
