use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("singular frequency matrix")]
    SingularMatrix,
    #[error("|M^-1| < 1 does not hold")]
    NotContracting,
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("ancestor closure exceeded cap of {cap} templates")]
    ClosureOverflow { cap: usize },
    #[error("no Abelian {k}-power found in a prefix of length {cap}")]
    WitnessNotFound { k: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
