use std::io;

use thiserror::Error;

use crate::subset::Subset;

/// All failures surfaced by the library.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// validation problems, exceeded enumeration guards, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex count must be positive")]
    EmptyVertexSet,
    #[error("layer count {0} outside 1..=8")]
    LayerCount(usize),
    #[error("layer {layer}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { layer: usize, vertex: usize, n: usize },
    #[error("layer {layer}: self-loop at vertex {vertex}")]
    SelfLoop { layer: usize, vertex: usize },
    #[error("expected {expected} layers, got {got}")]
    LayerMismatch { expected: usize, got: usize },
    #[error("subset {subset} is not a valid layer key here")]
    UnknownSubset { subset: Subset },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("multiplexon is not decomposable: {0}")]
    NotDecomposable(String),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("unsupported format tag {found:?}, expected {expected:?}")]
    FormatVersion { expected: String, found: String },
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Whether this error is a violated enumeration/size guard rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard(_))
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Malformed(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
