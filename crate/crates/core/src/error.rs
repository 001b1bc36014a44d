use thiserror::Error;

/// Errors raised by table construction and the testing procedures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("table is empty")]
    EmptyTable,
    #[error("column `{column}` has length {found}, expected {expected}")]
    LengthMismatch {
        column: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("score at row {row} is not finite")]
    NonFiniteScore { row: usize },
    #[error("grouped table needs at least one group")]
    NoGroups,
    #[error("symmetry parameter r must be positive and finite, got {0}")]
    InvalidSymmetry(f64),
    #[error("level must lie in (0, 1], got {0}")]
    InvalidLevel(f64),
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("k = {k} is outside the support 0..={cap}")]
    OutOfSupport { k: u64, cap: u64 },
    #[error("unknown hypothesis id `{0}`")]
    UnknownId(String),
    #[error("hypothesis id `{0}` is not mapped to a group")]
    UnmappedId(String),
    #[error("hypothesis id `{0}` appears more than once")]
    DuplicateId(String),
    #[error("malformed segment plan: {0}")]
    MalformedPlan(String),
    #[error("invalid partition at path entry {index}: {reason}")]
    InvalidPartition { index: usize, reason: String },
    #[error("grouping path is empty")]
    EmptyPath,
    #[error("split fraction {fraction} leaves an empty half of a table with {size} rows")]
    DegenerateSplit { fraction: f64, size: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
