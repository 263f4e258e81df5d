use thiserror::Error;

/// Errors raised anywhere in the compiler pipeline or the runtime.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("ordering {0:?} is not a permutation")]
    NotAPermutation(Vec<usize>),

    #[error("invalid bit width {0} (allowed: 0, 8, 16, 32, 64)")]
    InvalidBitWidth(u32),

    #[error("{what} value {value} does not fit in {width} bits")]
    BitWidthOverflow {
        what: &'static str,
        value: usize,
        width: u32,
    },

    #[error("coordinate {coords:?} out of bounds for shape {shape:?}")]
    CoordOutOfBounds {
        coords: Vec<usize>,
        shape: Vec<usize>,
    },

    #[error("invalid storage: {0}")]
    InvalidStorage(String),

    #[error("level {0} is dense and has no pointers/indices arrays")]
    LevelIsDense(usize),

    #[error("level {level} out of range for rank {rank}")]
    LevelOutOfRange { level: usize, rank: usize },

    #[error("insertion {coords:?} is not lexicographically after {previous:?}")]
    OutOfOrderInsertion {
        coords: Vec<usize>,
        previous: Vec<usize>,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: {coords} coordinates but {values} values")]
    LengthMismatch { coords: usize, values: usize },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown tensor `{0}`")]
    UnknownTensor(String),

    #[error("index variable `{0}` is used on the left-hand side only and was never declared")]
    UndeclaredIndexVar(String),

    #[error("iteration order conflict: cycle {}; insert an explicit convert", .0.join(" -> "))]
    OrderConflict(Vec<String>),

    #[error("index variable `{0}` does not occur in the kernel")]
    EmptyLattice(String),

    #[error("unsupported kernel: {0}")]
    Unsupported(String),

    #[error("format mismatch for `{name}`: kernel declares {expected}, input is {found}")]
    FormatMismatch {
        name: String,
        expected: String,
        found: String,
    },

    #[error("missing input tensor `{0}`")]
    MissingInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
