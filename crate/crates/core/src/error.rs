use thiserror::Error;

use crate::axioms::AxiomId;

/// Every failure the engine reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("instance has no agents or no objects")]
    EmptyInstance,

    #[error("total capacity {capacity} is smaller than the number of agents {agents}")]
    CapacityShortfall { capacity: u64, agents: usize },

    #[error("null-bottom domain requires a null-object")]
    NullObjectMissing,

    #[error("the null-object must be object index 0, found index {0}")]
    NullObjectNotFirst(usize),

    #[error("{what} count exceeds the configured bound of {limit}")]
    SizeOverflow { what: &'static str, limit: u64 },

    #[error("invalid preference: {0}")]
    InvalidPreference(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("preference of agent {agent} leaves the null-bottom domain")]
    DomainViolation { agent: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("tabulated rule has no entry for the requested profile")]
    TableMiss,

    #[error("axiom {axiom:?} is not applicable: {reason}")]
    AxiomNotApplicable { axiom: AxiomId, reason: String },

    #[error("parameter out of bounds: {0}")]
    Bounds(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
