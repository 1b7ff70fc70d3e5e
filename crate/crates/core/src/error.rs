use thiserror::Error;

use crate::qstate::QubitId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected {expected} amplitudes for {qubits} qubits, got {got}")]
    LengthMismatch {
        qubits: usize,
        expected: usize,
        got: usize,
    },
    #[error("state vector has zero norm")]
    ZeroVector,
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("register of {0} qubits exceeds the dense limit of {max}", max = crate::qstate::MAX_QUBITS)]
    TooManyQubits(usize),
    #[error("qubit {0} appears more than once")]
    DuplicateQubit(QubitId),
    #[error("qubit {0} is not in the register")]
    UnknownQubit(QubitId),
    #[error("qubit sets differ: {left:?} vs {right:?}")]
    QubitSetMismatch {
        left: Vec<QubitId>,
        right: Vec<QubitId>,
    },
    #[error("new order is not a permutation of the register")]
    NotAPermutation,
    #[error("gate matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("invalid qubit label {0:?}")]
    BadLabel(String),
    #[error("projection onto a zero-probability branch")]
    ImpossibleBranch,
    #[error("protocol width {n} outside supported range {min}..={max}")]
    WidthOutOfRange { n: usize, min: usize, max: usize },
    #[error("input state has {got} qubits, protocol width is {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("{role} does not own qubit {qubit}")]
    LocalityViolation { role: &'static str, qubit: QubitId },
    #[error("no Pauli correction reproduces the input on branch {0}")]
    NoCorrection(String),
    #[error("{count} Pauli corrections reproduce the input on branch {branch}")]
    AmbiguousCorrection { branch: String, count: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}
