//! Self-adjoint truncations, their eigensystems and the function calculus
//! built on them.

mod calculus;
mod eigen;
mod window;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub use calculus::{
    apply_function, apply_real_function, complex_spectral_measure, compose_functions_check,
    evolve, finite_part_projector, spectral_measure, spectral_projector, SpectralMeasure,
};
pub use eigen::{diagonalize, EigenSystem, DEGENERACY_TOLERANCE};
pub use window::{Endpoint, Interval, SpectralWindow, WINDOW_SNAP_TOLERANCE};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds {allowed:e}")]
    NotHermitian { deviation: f64, allowed: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("function returned a non-finite value at eigenvalue {eigenvalue}")]
    NonFiniteFunction { eigenvalue: f64 },
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("invalid spectral window: {0}")]
    Window(String),
    #[error("cutoff must be positive, got {0}")]
    Cutoff(f64),
    #[error("invalid eigensystem: {0}")]
    InvalidEigenSystem(String),
}

/// A dense self-adjoint matrix in the truncated basis.
///
/// Held exactly Hermitian: `entries[(i, j)] == entries[(j, i)].conj()` bit for
/// bit, with a real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity to `1e-12 · max|a_ij|`, then symmetrizes.
    pub fn new(matrix: CMatrix) -> Result<Self, OperatorError> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(OperatorError::NotSquare { rows, cols });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OperatorError::NonFinite);
        }
        let scale = matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let allowed = HERMITICITY_TOLERANCE * scale;
        let mut deviation = 0.0f64;
        for j in 0..cols {
            for i in 0..=j {
                deviation = deviation.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if deviation > allowed {
            return Err(OperatorError::NotHermitian { deviation, allowed });
        }
        Ok(Self::from_hermitian_parts(matrix))
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self, OperatorError> {
        Self::new(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    /// Symmetrizes a matrix already known to be Hermitian up to roundoff.
    pub(crate) fn from_hermitian_parts(mut matrix: CMatrix) -> Self {
        let n = matrix.nrows();
        debug_assert_eq!(n, matrix.ncols());
        for j in 0..n {
            matrix[(j, j)].im = 0.0;
            for i in 0..j {
                let avg = 0.5 * (matrix[(i, j)] + matrix[(j, i)].conj());
                matrix[(i, j)] = avg;
                matrix[(j, i)] = avg.conj();
            }
        }
        Self { matrix }
    }

    pub(crate) fn from_real_symmetric(matrix: DMatrix<f64>) -> Self {
        Self::from_hermitian_parts(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut matrix = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            matrix[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { matrix }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_same(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Entrywise difference. Hermitian exactly because both operands are.
    pub fn sub(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_same(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    pub fn apply(&self, x: &CVector) -> Result<CVector, OperatorError> {
        if x.len() != self.dimension() {
            return Err(OperatorError::DimensionMismatch {
                expected: self.dimension(),
                found: x.len(),
            });
        }
        Ok(&self.matrix * x)
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        max_norm(&self.matrix)
    }

    fn check_same(&self, other: &Self) -> Result<(), OperatorError> {
        if self.dimension() != other.dimension() {
            return Err(OperatorError::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        Ok(())
    }
}

/// `max_ij |a_ij|`.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Euclidean norm of a complex vector.
pub fn vector_norm(x: &CVector) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(OperatorError::NotHermitian { .. })
        ));
        assert!(matches!(
            HermitianOperator::new(CMatrix::zeros(2, 3)),
            Err(OperatorError::NotSquare { .. })
        ));
        let mut bad = CMatrix::identity(2, 2);
        bad[(1, 1)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(HermitianOperator::new(bad), Err(OperatorError::NonFinite));
    }

    #[test]
    fn symmetrizes_small_deviations_exactly() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 2.0);
        m[(1, 0)] = Complex64::new(1.0 + 1e-14, -2.0);
        m[(0, 0)] = Complex64::new(3.0, 1e-15);
        let h = HermitianOperator::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
        assert_eq!(h.matrix()[(0, 0)].im, 0.0);
        assert_eq!(h.matrix().adjoint(), *h.matrix());
    }

    #[test]
    fn difference_is_exact() {
        let a = HermitianOperator::from_diagonal(&[0.1, 0.7]);
        let b = HermitianOperator::from_diagonal(&[0.3, 0.2]);
        let v = a.sub(&b).unwrap();
        let back = &a.matrix - &b.matrix - &v.matrix;
        assert_eq!(max_norm(&back), 0.0);
        assert!(a.sub(&HermitianOperator::zeros(3)).is_err());
    }
}
