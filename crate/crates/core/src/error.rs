use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown server id {0}")]
    UnknownServer(usize),

    #[error("no path between servers {from} and {to}")]
    NoPath { from: usize, to: usize },

    #[error("topology is disconnected: nodes {component:?} unreachable from node {root}")]
    Disconnected { root: usize, component: Vec<usize> },

    #[error("duplicate node id {0}")]
    DuplicateNode(usize),

    #[error("infeasible processing budget {0} s")]
    InfeasibleBudget(f64),

    #[error("instance exceeds oracle limits: {0}")]
    OracleLimit(String),

    #[error("mismatched instances: {0}")]
    InstanceMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("refusing to write empty result set")]
    EmptyResults,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
