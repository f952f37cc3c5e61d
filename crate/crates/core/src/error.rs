use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("edge {edge:?} has nonpositive length {length}")]
    NonpositiveLength { edge: String, length: String },
    #[error("edge {edge:?} references undeclared vertex {vertex:?}")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("offset {offset} out of range [0, {length}] on edge {edge:?}")]
    OffsetOutOfRange {
        edge: String,
        offset: String,
        length: String,
    },
    #[error("edge {0:?} does not have unit length")]
    NonUnitLength(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph contains no theta")]
    NoTheta,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("size bound exceeded: {0}")]
    SizeBound(String),
    #[error("metric is not of negative type")]
    NotNegativeType,
    #[error("malformed metric: {0}")]
    MalformedMetric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
