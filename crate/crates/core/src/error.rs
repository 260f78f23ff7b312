use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("operator is not a contraction (norm {norm:.6})")]
    NotContraction { norm: f64 },

    #[error("operators are not contractions (norms {left:.6}, {right:.6})")]
    NotContractions { left: f64, right: f64 },

    #[error("operators do not commute (commutator residual {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator is not an isometry (residual {residual:.3e})")]
    NotIsometry { residual: f64 },

    #[error("simultaneous triangularization failed after {attempts} attempts")]
    TriangularizationFailed { attempts: usize },

    #[error("principal square root unavailable: {0}")]
    SqrtFailed(String),

    #[error("numerical radius {omega:.6} exceeds 1")]
    NumericalRadiusExceeded { omega: f64 },

    #[error("factorization residual {residual:.3e} exceeds tolerance")]
    FactorizationResidualExceeded { residual: f64 },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
