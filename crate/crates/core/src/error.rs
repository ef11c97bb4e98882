use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree {degree} is not below the block prime {lprime}")]
    DegreeTooLarge { degree: usize, lprime: u64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("BK string weight {weight} exceeds the code limit G = {limit}")]
    WeightExceeded { weight: usize, limit: usize },

    #[error("input is not a codeword; re-encoding differs at {} positions", mismatch.len())]
    NotACodeword { mismatch: Vec<usize> },

    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("segment code needs M >= 2F+2 (M = {modes}, F = {fermions})")]
    NoSegmentAdvantage { modes: usize, fermions: usize },

    #[error("support set of size {0} is not odd")]
    InvalidSupport(usize),

    #[error("polynomial is not realizable by signal processing: {0}")]
    InfeasiblePolynomial(String),

    #[error("phase finding did not converge (residual {residual:e})")]
    AngleFindingFailed { residual: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("Hermiticity audit failed for {} term(s)", offenders.len())]
    AuditFailed { offenders: Vec<String> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
