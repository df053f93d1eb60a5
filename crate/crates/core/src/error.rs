use thiserror::Error;

use crate::dag::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid DAG: {}", join(.0))]
    InvalidDag(Vec<Violation>),
    #[error("unknown vertex id {0}")]
    UnknownVertex(u32),
    #[error("unknown vertex name {0:?}")]
    UnknownName(String),
    #[error("duplicate vertex name {0:?}")]
    DuplicateName(String),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("DAG must have a single source and a single sink")]
    NotNormalized,
    #[error("core count must be at least 1")]
    ZeroCores,
    #[error("invalid bound parameters: {0}")]
    InvalidParameters(String),
    #[error("execution time {exec} of vertex {vertex} exceeds its WCET {wcet}")]
    ExecExceedsWcet { vertex: u32, exec: u64, wcet: u64 },
    #[error("instance exceeds the enumeration budget: {0}")]
    BudgetExceeded(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
