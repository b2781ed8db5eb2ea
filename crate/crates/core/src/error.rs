use thiserror::Error;

/// Failure modes surfaced by the numerical layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The adaptive integrator shrank the step below resolvable size.
    #[error("integrator step underflow at t = {t:e} (step {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    /// A state component became NaN or infinite during integration.
    #[error("non-finite state encountered at t = {t:e}")]
    NonFiniteState { t: f64 },
    /// Inverse iteration failed to reach the residual target.
    #[error("inverse iteration did not converge for eigenvalue index {index}")]
    EigenNoConverge { index: usize },
    #[error("invalid dimension: {what}")]
    BadDimension { what: &'static str },
    #[error("non-finite input: {what}")]
    NonFiniteInput { what: &'static str },
    /// Polar coordinates require a strictly positive amplitude ratio.
    #[error("amplitude ratio must be positive, got {r:e}")]
    NonpositiveRadius { r: f64 },
    /// The phase-trapping propagator only applies when the effective
    /// tunneling g + (N-1)chi vanishes.
    #[error("trapping condition violated: g + (N-1)chi = {residual:e}")]
    NotTrapped { residual: f64 },
    /// Truncating the coherent tail discarded too much weight.
    #[error("coherent state loses weight {deficit:e} at cutoff {n_trunc}; raise the cutoff")]
    TruncationDeficit { deficit: f64, n_trunc: usize },
    #[error("variance must be positive, got {value:e}")]
    NonpositiveVariance { value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
