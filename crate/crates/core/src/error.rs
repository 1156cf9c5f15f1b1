use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular point: |x| = {norm:e} is inside the excluded ball")]
    SingularPoint { norm: f64 },
    #[error("quadrature did not converge: successive refinements differ by {delta:e} (tolerance {tol:e})")]
    QuadratureNonConvergence { delta: f64, tol: f64 },
    #[error("truncation domain too small: tail mass {tail:e} exceeds tolerance {tol:e}")]
    TruncationTooSmall { tail: f64, tol: f64 },
    #[error("grid resolution: {0}")]
    GridResolution(String),
    #[error("memory budget exceeded: {entries} entries requested, cap is {cap}")]
    MemoryBudget { entries: usize, cap: usize },
    #[error("iteration did not converge after {iterations} steps (last relative change {change:e})")]
    NonConvergence { iterations: usize, change: f64 },
    #[error("operator not invertible: {0}")]
    NotInvertible(String),
    #[error("spectral parameter z = {z} sits on a pole of the resolvent (pole at {pole})")]
    Pole { z: f64, pole: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("divergent quantity: {0}")]
    Divergent(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
