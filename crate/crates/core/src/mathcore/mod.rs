//! Numerical kernels shared by the rest of the crate.

mod bessel;
mod cholesky;
mod constellation;
mod eigen;
mod matrix;

pub use bessel::bessel_j0;
pub use cholesky::{
    real_symmetric_cholesky, real_toeplitz_cholesky, toeplitz, toeplitz_cholesky, RealCholesky,
    JITTER_REL,
};
pub use constellation::{map_bits, Constellation, ConstellationKind};
pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, numerical_rank, singular_values, HermitianEigen,
    DEFAULT_RANK_TOL, HERMITIAN_TOL,
};
pub use matrix::ComplexMatrix;

pub use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MathError {
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix shapes do not agree")]
    ShapeMismatch,
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix has non-zero imaginary parts")]
    NotReal,
    #[error("matrix is not positive semidefinite, even after diagonal jitter")]
    NotPsd,
    #[error("empty input")]
    Empty,
    #[error("unknown constellation `{0}`")]
    UnknownConstellation(String),
}
