use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("theory mismatch: {0} vs {1}")]
    TheoryMismatch(String, String),
    #[error("unsupported in theory {theory}: {what}")]
    UnsupportedTheory { theory: String, what: String },
    #[error("invalid gate at index {index}: {reason}")]
    InvalidGate { index: usize, reason: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension cap exceeded: {qubits} qubits > cap {cap}")]
    DimensionCap { qubits: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not an isometry (deviation {0:.3e})")]
    NotIsometry(f64),
    #[error("top-left block is not the identity (deviation {0:.3e})")]
    BlockNotIdentity(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("solver failure: {0}")]
    SolveFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown rule: {0}")]
    UnknownRule(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("stale match: {0}")]
    StaleMatch(String),
    #[error("step {index} failed: {reason}")]
    StepFailed { index: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
