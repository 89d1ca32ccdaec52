use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration diverged at step {step}: state {state:?}")]
    Divergence { step: usize, state: Vec<f64> },

    #[error("underdetermined system: {rows} samples for {columns} library columns")]
    Underdetermined { rows: usize, columns: usize },

    #[error("all coefficients were pruned by the threshold")]
    EmptyModel,

    #[error("rank-deficient regression, dependent columns {columns:?}")]
    DegenerateRegression { columns: Vec<usize> },

    #[error("no candidate survived for coordinate {coordinate}: {reason}")]
    IdentificationFailure { coordinate: usize, reason: String },

    #[error("data size {size}: {source}")]
    AtSize {
        size: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("key is unusable for this map: {0}")]
    KeyUnusable(Box<Error>),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("correlation undefined: zero variance")]
    UndefinedCorrelation,

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("parse error on line {line}: {message}")]
    LineParse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
