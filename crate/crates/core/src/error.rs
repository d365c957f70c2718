use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate assignment for ({item}, {user})")]
    DuplicateAssignment {
        line: usize,
        item: String,
        user: String,
    },

    #[error("duplicate identifier `{0}`")]
    DuplicateIdentifier(String),

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("undefined similarity: {0} is a zero vector")]
    UndefinedSimilarity(String),

    #[error("null observable: trace is {0}")]
    NullObservable(f64),

    #[error("not an observable: {0}")]
    NotObservable(String),

    #[error("vectors are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("vector {index} is not a unit vector (norm {norm})")]
    NotUnit { index: usize, norm: f64 },

    #[error("svd did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("power iteration did not converge after {iterations} iterations (step {step:e})")]
    PowerIteration { iterations: usize, step: f64 },

    #[error("zero matrix")]
    ZeroMatrix,

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("context too large: {0}")]
    ContextTooLarge(String),

    #[error("concept does not belong to this lattice")]
    ForeignConcept,

    #[error("behaviors range over different item sets")]
    MismatchedItems,

    #[error("similarity {0} outside [-1, 1]")]
    SimilarityOutOfRange(f64),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
