use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli character {ch:?} at position {position}")]
    InvalidPauliChar { ch: char, position: usize },

    #[error("expected {expected} Pauli letters, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("qubit count mismatch: {left} vs {right}")]
    QubitCountMismatch { left: usize, right: usize },

    #[error("qubit index {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("two-qubit gate needs distinct operands, got {0} twice")]
    RepeatedOperand(usize),

    #[error("operator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),

    #[error("{0} is not a Clifford gate")]
    NotClifford(String),

    #[error("identity Pauli has no exponentiation circuit (global phase only)")]
    IdentityRotation,

    #[error("{num_qubits} qubits exceeds the dense simulation limit of {limit}")]
    TooManyQubits { num_qubits: usize, limit: usize },

    #[error("coupling graph is disconnected")]
    DisconnectedGraph,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
