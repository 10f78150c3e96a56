use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, {cols} entries per row")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("not Hermitian: max |A[i][j] - conj(A[j][i])| = {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("eigensolver did not converge: off-diagonal residual {residual:.3e} after {sweeps} sweeps")]
    EigenFailure { residual: f64, sweeps: usize },

    #[error("basis is not orthonormal: ||V'V - I|| = {residual:.3e}")]
    NotOrthonormal { residual: f64 },

    #[error("support violation: eigenvalue {eigenvalue:.3e} below floor under strict policy")]
    SupportViolation { eigenvalue: f64 },

    #[error("not positive semi-definite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is {trace:.12} (expected 1 within 1e-10)")]
    InvalidTrace { trace: f64 },

    #[error("clipped negative mass {clipped:.3e} exceeds the 1e-9 budget")]
    ExcessiveClipping { clipped: f64 },

    #[error("POVM elements do not sum to identity: residual {residual:.3e}")]
    PovmNotComplete { residual: f64 },

    #[error("not a probability vector: {0}")]
    InvalidProbability(String),

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("{failed} of {total} trials failed (budget is 1%)")]
    TrialFailures { failed: usize, total: usize },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
