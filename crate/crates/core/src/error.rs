use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular over GF(2)")]
    SingularMatrix,

    #[error("all-zero LFSR key cannot generate a sequence")]
    DegenerateKey,

    #[error("invalid connection polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("sequence length {n} must exceed the register length {k}")]
    InsufficientLength { n: usize, k: usize },

    #[error("only {found} linearly independent positions available, need {needed}")]
    SelectionFailure { found: usize, needed: usize },

    #[error("correction ratio undefined: no bit falls below any candidate threshold")]
    UndefinedRatio,

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            name,
            value,
            min,
            max,
        }
    }
}
