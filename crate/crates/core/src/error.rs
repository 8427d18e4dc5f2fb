use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("model mismatch: `{left}` vs `{right}`")]
    ModelMismatch { left: String, right: String },

    #[error("level {level} out of range (top level {top})")]
    LevelOutOfRange { level: usize, top: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("certification failed at level {level}: {reason}")]
    CertificationFailed { level: usize, reason: String },

    #[error("operator is not certified for T_{{{r},{b}}}")]
    Uncertified { r: usize, b: usize },

    #[error("no Hausdorff witness: {0}")]
    NoWitness(String),

    #[error("infeasible at truncation: {0}")]
    Infeasible(String),

    #[error("overlapping supports between conditions {first} and {second}")]
    OverlappingSupports { first: usize, second: usize },

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
