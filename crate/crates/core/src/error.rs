use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("channel is not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },
    #[error("eigendecomposition failed to converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },
    #[error("test states are not mutually orthogonal (overlap {overlap:e})")]
    NotOrthogonal { overlap: f64 },
    #[error("channel is not Gibbs preserving (residual {residual:e})")]
    NotGibbsPreserving { residual: f64 },
    #[error("channel is not covariant (deviation {deviation:e})")]
    NotCovariant { deviation: f64 },
    #[error("pointer basis does not commute with the output charge (residual {residual:e})")]
    YanaseViolation { residual: f64 },
    #[error("isometry is not covariant (residual {residual:e})")]
    NotCovariantCode { residual: f64 },
    #[error("dense simulation of dimension {dim} exceeds the cap {cap}")]
    SimulationTooLarge { dim: usize, cap: usize },
    #[error("inequality violated: lhs {lhs} > rhs {rhs} (slack {slack:e})")]
    InequalityViolated { lhs: f64, rhs: f64, slack: f64 },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
