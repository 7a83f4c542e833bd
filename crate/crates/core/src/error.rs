use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid radical base: {0}")]
    InvalidRoot(String),
    #[error("incompatible radical bases: {left} vs {right}")]
    IncompatibleBase { left: String, right: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("p-adic valuation of zero is infinite")]
    ZeroValuation,
    #[error("value must be positive: {0}")]
    NotPositive(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("invalid digit set: {0}")]
    InvalidDigits(String),
    #[error("matrix is not expanding: {0}")]
    NotExpanding(String),
    #[error("instance must be normalized (d0 = 0, d1 = (k, 0)) when rho1 != rho2; run normalize_digits first")]
    NotNormalized,
    #[error("zero structure: {0}")]
    ZeroStructure(String),
    #[error("wrong branch: {0}")]
    WrongBranch(String),
    #[error("exact Hadamard check needs rational exponents ({0}); use numeric mode")]
    IrrationalExponent(String),
    #[error("size limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
