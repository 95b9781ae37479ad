use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported alphabet: {0}")]
    UnsupportedAlphabet(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} out of range: {value} (valid: {valid})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        valid: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("search inconclusive: {0}")]
    Inconclusive(String),

    #[error("invalid attractor: {0}")]
    InvalidAttractor(String),

    #[error("fingerprint collision between distinct {rows}x{cols} submatrices at {a:?} and {b:?}")]
    HashCollision {
        rows: usize,
        cols: usize,
        a: (usize, usize),
        b: (usize, usize),
    },

    #[error("bad magic bytes, not a serialized block tree")]
    BadMagic,

    #[error("unsupported or missing format version: {0:?}")]
    Version(Option<u8>),

    #[error("truncated input: {0}")]
    Truncated(String),

    #[error("corrupt block tree: {0}")]
    Corrupt(String),
}

pub(crate) fn out_of_range(what: &'static str, value: usize, valid: impl ToString) -> Error {
    Error::OutOfRange {
        what,
        value,
        valid: valid.to_string(),
    }
}
