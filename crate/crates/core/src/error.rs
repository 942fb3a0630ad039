use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive semidefinite (pivot {pivot:.3e} at row {row})")]
    NotPsd { row: usize, pivot: f64 },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("arm {arm}: covariance is not positive semidefinite")]
    ArmNotPsd { arm: usize },
    #[error("arm {arm}: Frobenius norm {norm} exceeds gamma {gamma}")]
    GammaViolated { arm: usize, norm: f64, gamma: f64 },
    #[error("environment needs at least one arm")]
    NoArms,
    #[error("horizon {0} is too small")]
    HorizonTooSmall(usize),
    #[error("pull counts sum to {sum}, expected {n}")]
    CountMismatch { sum: f64, n: usize },
    #[error("arm {0} has zero gap; no pull-count bound exists")]
    ZeroGap(usize),
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("lambda {lambda} is too large: 1/sigma_c = {inv_sigma_c} must stay positive")]
    LambdaTooLarge { lambda: f64, inv_sigma_c: f64 },
    #[error("regret estimate at n = {n} is not positive; {remaining} usable points remain")]
    NonPositiveRegret { n: usize, remaining: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    /// Config-level problems (as opposed to numerical/runtime ones).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Validation(_))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
