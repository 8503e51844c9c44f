//! Error type shared by every module in the crate.
//!
//! The variants are coarse on purpose: callers mostly need to distinguish
//! bad inputs (`Domain`, `Dimension`, `Config`) from runtime breakdowns of
//! the numerics (`Numerical`, `DegenerateWeights`, `EstimatorFailure`) and
//! from checks that a mathematical guarantee failed to hold on concrete
//! data (`PropertyViolation`). The CLI maps these groups onto exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RidgeError {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes of matrices / vectors do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The operation is not defined for this variant (e.g. conditional
    /// sampling from an opaque custom reference measure).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// All importance weights vanished; no self-normalized estimate exists.
    #[error("degenerate importance weights: {0}")]
    DegenerateWeights(String),

    /// A Monte Carlo estimator hit non-finite evaluations it cannot absorb.
    #[error("estimator failure: {context} ({rejected} sample(s) rejected)")]
    EstimatorFailure { context: String, rejected: usize },

    /// An iterative kernel (eigensolver, factorization) failed to converge
    /// or met a matrix outside its assumptions.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed configuration or input file.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A certified inequality was violated on concrete data.
    #[error("property violation: {0}")]
    PropertyViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RidgeError>;

impl RidgeError {
    /// Process exit code used by the command line front end.
    ///
    /// 2 = unusable input, 3 = violated guarantee, 4 = numerical breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            RidgeError::Domain(_)
            | RidgeError::Dimension(_)
            | RidgeError::Unsupported(_)
            | RidgeError::Config(_)
            | RidgeError::Io(_) => 2,
            RidgeError::PropertyViolation(_) => 3,
            RidgeError::DegenerateWeights(_)
            | RidgeError::EstimatorFailure { .. }
            | RidgeError::Numerical(_) => 4,
        }
    }
}
