use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate base case n0 = {0}: must be even, at least 2 and different from 16")]
    Degenerate(usize),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("rows {0} and {1} are not kin")]
    NotKin(usize, usize),

    #[error("kin pairs overlap at row {0}")]
    OverlappingPairs(usize),

    #[error("exact expansion needs {needed} terms but the budget is {budget}; use randomized verification")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("a coefficient denominator is divisible by {0}; choose a different prime")]
    BadPrime(u64),

    #[error("{0} is not a usable prime modulus")]
    NotPrime(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid algorithm file: {0}")]
    Format(String),

    #[error("substitution rejected: {0}")]
    Substitution(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable category, used by the CLI for error reports.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Degenerate(_) => "degenerate",
            Error::Singular(_) => "singular",
            Error::NotKin(..) | Error::OverlappingPairs(_) => "kin",
            Error::BudgetExceeded { .. } => "budget",
            Error::BadPrime(_) | Error::NotPrime(_) => "prime",
            Error::Parse(_) | Error::Format(_) | Error::Json(_) => "format",
            Error::Substitution(_) => "substitution",
            Error::VerificationFailed(_) => "verification",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
