use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {column} has zero norm")]
    ZeroColumn { column: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("index {index} out of range for domain of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("seed does not fit in {bits} bits")]
    SeedOutOfRange { bits: u64 },

    #[error("enumeration needs {required} steps but the budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    #[error("seed accounting overflow: {blocks} blocks would need {required_bits} seed bits")]
    SeedOverflow { blocks: u128, required_bits: u128 },

    #[error("columns {a} and {b} are not orthogonal (inner product {dot:e})")]
    NotOrthogonal { a: usize, b: usize, dot: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.to_path_buf(),
            source,
        }
    }
}
