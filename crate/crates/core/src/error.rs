use thiserror::Error;

/// Errors surfaced by the numerical routines.
///
/// Scalar payloads are carried as `f64` so the error type does not depend on
/// the scalar parameter of the computation that produced it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violated its domain; the message names the inequality.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The result is not representable (e.g. `e^x` overflows).
    #[error("overflow: {0}")]
    Overflow(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e} after {subdivisions} subdivisions")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// An iterative special-function evaluation did not converge.
    #[error("series or continued fraction did not converge: {0}")]
    NonConvergence(String),

    /// An operator was evaluated at one of its coefficient singularities.
    #[error("operator evaluated at singular point x = {0}")]
    SingularPoint(f64),

    /// A test function does not satisfy the admissibility conditions.
    #[error("inadmissible test function {name}: {reason}")]
    InadmissibleTestFunction { name: String, reason: String },

    /// Malformed input data.
    #[error("invalid data: {0}")]
    Data(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures caused by numerical non-convergence rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. } | Error::NonConvergence(_) | Error::Overflow(_)
        )
    }
}
