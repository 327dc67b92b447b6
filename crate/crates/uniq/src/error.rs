//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gate {gate}: qubit {qubit} out of range for {num_qubits} qubits")]
    OperandOutOfRange {
        gate: usize,
        qubit: usize,
        num_qubits: usize,
    },

    #[error("gate {gate}: control and target are both q{qubit}")]
    DuplicateOperand { gate: usize, qubit: usize },

    #[error("malformed document: {0}")]
    MalformedDocument(String),

    #[error("line {line}, column {col}: unsupported statement: {what}")]
    UnsupportedStatement {
        line: usize,
        col: usize,
        what: String,
    },

    #[error("line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("topology is disconnected: nodes {unreachable:?} unreachable from node 0")]
    DisconnectedTopology { unreachable: Vec<usize> },

    #[error("bad node count {n} for {kind} topology: {why}")]
    BadNodeCount {
        kind: &'static str,
        n: usize,
        why: &'static str,
    },

    #[error("a seed is required to generate a random topology")]
    SeedRequired,

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("no slot <= horizon {horizon} admits gate {gate}")]
    HorizonExhausted { gate: usize, horizon: u32 },

    #[error("mapping mismatch: {0}")]
    MappingMismatch(String),

    #[error("no cost entry for QPU pair ({u}, {v})")]
    MissingCost { u: usize, v: usize },

    #[error("instance exceeds exact-solver limits: {0}")]
    TooLarge(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable class name, used in CLI error output.
    pub fn class(&self) -> &'static str {
        match self {
            Error::OperandOutOfRange { .. } => "operand-out-of-range",
            Error::DuplicateOperand { .. } => "duplicate-operand",
            Error::MalformedDocument(_) => "malformed-document",
            Error::UnsupportedStatement { .. } => "unsupported-statement",
            Error::Parse { .. } => "parse-error",
            Error::DisconnectedTopology { .. } => "disconnected-topology",
            Error::BadNodeCount { .. } => "bad-node-count",
            Error::SeedRequired => "seed-required",
            Error::Infeasible(_) => "infeasible",
            Error::HorizonExhausted { .. } => "horizon-exhausted",
            Error::MappingMismatch(_) => "mapping-mismatch",
            Error::MissingCost { .. } => "missing-cost",
            Error::TooLarge(_) => "too-large",
            Error::InvalidInput(_) => "invalid-input",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code: 2 infeasible instance, 3 invalid input, 4 internal limit.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 2,
            Error::HorizonExhausted { .. } | Error::TooLarge(_) => 4,
            _ => 3,
        }
    }
}
