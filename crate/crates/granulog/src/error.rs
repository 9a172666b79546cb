use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("arity error at {path}: node has {found} children, expected {expected}")]
    Arity {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("operation requires a propositional alphabet")]
    NotPropositional,
    #[error("automaton classes or parameters do not match: {0}")]
    Mismatch(String),
    #[error("inner automaton class does not support {0}")]
    Capability(String),
    #[error("resource cap exceeded: {0} (limit {1})")]
    ResourceCap(String, usize),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("layering violation at {line}:{col}: {msg}")]
    Layering { line: usize, col: usize, msg: String },
    #[error("model kind does not match: {0}")]
    KindMismatch(String),
    #[error("unsupported fragment: {0}")]
    Fragment(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
