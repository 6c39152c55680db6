use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("qubit index {index} out of range for width {width}")]
    QubitOutOfRange { index: usize, width: usize },
    #[error("CX control and target are both {0}")]
    SameControlTarget(usize),
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("unsupported ansatz: {0}")]
    UnsupportedAnsatz(String),
    #[error("parameter count mismatch: expected {expected}, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("unsupported gate for stabilizer simulation: {0}")]
    UnsupportedGate(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("physical error rate {p} is not below threshold {p_th}")]
    AboveThreshold { p: f64, p_th: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("program does not fit: {0}")]
    NoFit(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
