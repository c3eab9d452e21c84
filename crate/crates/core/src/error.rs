use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not a projective point")]
    NotProjective,
    #[error("chart undefined here")]
    ChartUndefined,
    #[error("support mismatch: sieving set for prime {0} outside the support")]
    SupportMismatch(u64),
    #[error("degenerate sieving set at prime {0}")]
    DegenerateSievingSet(u64),
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("outside étale locus")]
    OutsideEtaleLocus,
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("residual characteristic: p = l = {0}")]
    ResidualCharacteristic(u64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("brute force infeasible: {0}")]
    Infeasible(String),
    #[error("empty support")]
    EmptySupport,
    #[error("prediction unavailable: {0}")]
    PredictionUnavailable(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("missing input file {0}")]
    MissingInput(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            msg: err.to_string(),
        }
    }
}
