use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("coordinate not a leaf: {0}")]
    NotALeaf(String),
    #[error("coordinate out of schema: {0}")]
    BadCoord(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("arity error: expected {expected} dynamic extents, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("index type overflow: {0}")]
    IndexTypeOverflow(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("selector path invalid: {0}")]
    SelectorInvalid(String),
    #[error("unsupported conversion: {0}")]
    UnsupportedConversion(String),
    #[error("invalid bit count: {0}")]
    InvalidBitCount(String),
    #[error("no such field: {0}")]
    NoSuchField(String),
    #[error("incompatible views: {0}")]
    IncompatibleViews(String),
    #[error("invalid simd width: {0}")]
    InvalidWidth(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("allocation failed: {0}")]
    Alloc(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
