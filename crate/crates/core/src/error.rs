use thiserror::Error;

/// Failure modes shared by the analytic model and its oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A denominator vanished; the parameters sit on an exact pole.
    #[error("degenerate denominator in {context}")]
    DegenerateDenominator { context: &'static str },

    /// The requested quantity has no finite value in this parameter regime.
    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The explicit integrator left its stability region or blew up.
    #[error("unstable step: {0}")]
    UnstableStep(String),

    #[error("insufficient ensemble: {0}")]
    InsufficientEnsemble(String),

    #[error("quadrature not converged at order {order}: relative change {change:e}")]
    QuadratureNotConverged { order: usize, change: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
