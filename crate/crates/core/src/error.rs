//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QdError {
    /// A value or combination of values fails a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Operands have incompatible sizes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A compilation target cannot be realised by any pulse sequence.
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    /// The integration step does not resolve the fastest rate in the problem.
    #[error("time step {dt} ns too coarse: dt * max rate = {product:.3} >= 0.1")]
    StepSize { dt: f64, product: f64 },

    /// The density matrix developed a negative eigenvalue beyond tolerance.
    #[error(
        "positivity breach at t = {t:.6} ns: min eigenvalue {min_eig:.3e} \
         (dt = {dt} ns; reduce the step size)"
    )]
    PositivityBreach { t: f64, min_eig: f64, dt: f64 },

    /// Nonlinear least squares exhausted its iteration budget.
    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),

    /// The data do not determine the requested model.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

impl QdError {
    /// True for failures of the numerics themselves rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QdError::PositivityBreach { .. }
                | QdError::FitNonConvergence(_)
                | QdError::DegenerateFit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, QdError>;
