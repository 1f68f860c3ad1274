use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid labeling: {0}")]
    InvalidLabeling(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported factor arity {arity} (factor {factor}): {context}")]
    UnsupportedArity {
        factor: usize,
        arity: usize,
        context: &'static str,
    },
    #[error("state space of {size} labelings exceeds cap {cap}")]
    CapExceeded { size: f64, cap: f64 },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
