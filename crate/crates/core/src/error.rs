use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants fall into three families that the command-line front end maps
/// to distinct exit codes: validation failures, failed preconditions
/// (infeasible constructions), and numerical limits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("trace is {0:.12}, expected 1")]
    InvalidTrace(f64),

    #[error("channel is not CPTP (min eigenvalue {min_eig:.3e}, TP residual {tp_residual:.3e})")]
    NotCptp { min_eig: f64, tp_residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("condition violated: {condition} (value {value:.6e})")]
    ConditionViolated { condition: String, value: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical limit: {0}")]
    NumericalLimit(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for validation errors, 3 for infeasible or failed
    /// preconditions, 4 for numerical limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConditionViolated { .. } | Error::Infeasible(_) | Error::NotCptp { .. } => 3,
            Error::NumericalLimit(_) => 4,
            _ => 2,
        }
    }

    /// Stable identifier of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::NonFinite => "non-finite",
            Error::NotHermitian(_) => "not-hermitian",
            Error::NotPsd(_) => "not-psd",
            Error::InvalidTrace(_) => "invalid-trace",
            Error::NotCptp { .. } => "not-cptp",
            Error::InvalidInput(_) => "invalid-input",
            Error::UnknownSymbol(_) => "unknown-symbol",
            Error::ConditionViolated { .. } => "condition-violated",
            Error::Infeasible(_) => "infeasible",
            Error::NumericalLimit(_) => "numerical-limit",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
