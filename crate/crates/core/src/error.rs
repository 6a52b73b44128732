use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input violates a documented precondition.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// Evaluation point coincides with a root of `P_n`.
    #[error("evaluation point {0} coincides with a root")]
    Pole(num_complex::Complex64),

    /// Requested derivative order or symmetric-polynomial degree is too large.
    #[error("order {order} exceeds available degree {degree}")]
    OrderTooLarge { order: usize, degree: usize },

    /// A theorem hypothesis required by a bound formula does not hold.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("root finder did not converge: worst residual {worst_residual:e} after {iterations} iterations")]
    NonConvergence {
        worst_residual: f64,
        iterations: usize,
    },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("config error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
