//! Projection-valued measure, scalar and complex spectral measures, and the
//! function calculus `f(B) = Σ f(λ_i) |x_i⟩⟨x_i|`.
//!
//! Only the values of `f` on the eigenvalue list matter; two functions that
//! agree on the spectrum give the same operator.

use num_complex::Complex64;

use super::{
    diagonalize, max_norm, vector_norm, CMatrix, CVector, EigenSystem, HermitianOperator,
    OperatorError, SpectralWindow,
};

/// Atoms `(λ_i, |⟨x_i, x⟩|^2)` of the spectral measure of a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `μ(Ω)`.
    pub fn mass_in(&self, window: &SpectralWindow) -> f64 {
        self.atoms
            .iter()
            .filter(|a| window.contains(a.0))
            .map(|a| a.1)
            .sum()
    }

    /// `∫ λ dμ`.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.0 * a.1).sum::<f64>() / self.total_mass()
    }
}

fn check_len(eig: &EigenSystem, x: &CVector) -> Result<(), OperatorError> {
    if x.len() != eig.dimension() {
        return Err(OperatorError::DimensionMismatch {
            expected: eig.dimension(),
            found: x.len(),
        });
    }
    Ok(())
}

/// `E_Ω = Σ_{λ_i ∈ Ω} |x_i⟩⟨x_i|`.
pub fn spectral_projector(eig: &EigenSystem, window: &SpectralWindow) -> HermitianOperator {
    let n = eig.dimension();
    let selected: Vec<usize> = (0..n)
        .filter(|&i| window.contains(eig.eigenvalues()[i]))
        .collect();
    let mut block = CMatrix::zeros(n, selected.len());
    for (dst, &src) in selected.iter().enumerate() {
        block.set_column(dst, &eig.eigenvectors().column(src));
    }
    HermitianOperator::from_hermitian_parts(&block * block.adjoint())
}

/// Scalar spectral measure `μ^(x)(Ω) = ‖E_Ω x‖^2`.
pub fn spectral_measure(eig: &EigenSystem, x: &CVector) -> Result<SpectralMeasure, OperatorError> {
    check_len(eig, x)?;
    if vector_norm(x) == 0.0 {
        return Err(OperatorError::ZeroVector);
    }
    let coeffs = eig.eigenvectors().ad_mul(x);
    let atoms = eig
        .eigenvalues()
        .iter()
        .zip(coeffs.iter())
        .map(|(&lam, c)| (lam, c.norm_sqr()))
        .collect();
    Ok(SpectralMeasure { atoms })
}

/// Complex measure `μ^(x,y)(Ω) = ⟨x, E_Ω y⟩` as atoms `(λ_i, ⟨x_i,x⟩* ⟨x_i,y⟩)`.
pub fn complex_spectral_measure(
    eig: &EigenSystem,
    x: &CVector,
    y: &CVector,
) -> Result<Vec<(f64, Complex64)>, OperatorError> {
    check_len(eig, x)?;
    check_len(eig, y)?;
    let cx = eig.eigenvectors().ad_mul(x);
    let cy = eig.eigenvectors().ad_mul(y);
    Ok(eig
        .eigenvalues()
        .iter()
        .zip(cx.iter().zip(cy.iter()))
        .map(|(&lam, (a, b))| (lam, a.conj() * b))
        .collect())
}

/// `f(B) = Σ f(λ_i) |x_i⟩⟨x_i|` for complex-valued `f`.
pub fn apply_function<F>(eig: &EigenSystem, f: F) -> Result<CMatrix, OperatorError>
where
    F: Fn(f64) -> Complex64,
{
    let mut scaled = eig.eigenvectors().clone();
    for (j, &lam) in eig.eigenvalues().iter().enumerate() {
        let v = f(lam);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(OperatorError::NonFiniteFunction { eigenvalue: lam });
        }
        for z in scaled.column_mut(j).iter_mut() {
            *z *= v;
        }
    }
    Ok(scaled * eig.eigenvectors().adjoint())
}

/// `f(B)` for real `f`, returned as an exactly Hermitian operator.
pub fn apply_real_function<F>(eig: &EigenSystem, f: F) -> Result<HermitianOperator, OperatorError>
where
    F: Fn(f64) -> f64,
{
    let m = apply_function(eig, |lam| Complex64::new(f(lam), 0.0))?;
    Ok(HermitianOperator::from_hermitian_parts(m))
}

/// `‖g(f(B)) − (g∘f)(B)‖_max`, evaluating the left side by diagonalizing
/// `f(B)` afresh.
pub fn compose_functions_check<F, G>(eig: &EigenSystem, f: F, g: G) -> Result<f64, OperatorError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> Complex64,
{
    let inner = apply_real_function(eig, &f)?;
    let inner_eig = diagonalize(&inner)?;
    let nested = apply_function(&inner_eig, &g)?;
    let direct = apply_function(eig, |lam| g(f(lam)))?;
    Ok(max_norm(&(nested - direct)))
}

/// `exp(−iBt) x` through the eigen-expansion. `t == 0` returns `x` unchanged.
pub fn evolve(eig: &EigenSystem, t: f64, x: &CVector) -> Result<CVector, OperatorError> {
    check_len(eig, x)?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    let mut coeffs = eig.eigenvectors().ad_mul(x);
    for (c, &lam) in coeffs.iter_mut().zip(eig.eigenvalues()) {
        *c *= Complex64::from_polar(1.0, -lam * t);
    }
    Ok(eig.eigenvectors() * coeffs)
}

/// Projection onto the spectral subspace `[−Λ, Λ]`, discarding every mode
/// whose eigenvalue exceeds the cutoff in magnitude.
pub fn finite_part_projector(eig: &EigenSystem, cutoff: f64) -> Result<HermitianOperator, OperatorError> {
    if cutoff.is_nan() || cutoff <= 0.0 {
        return Err(OperatorError::Cutoff(cutoff));
    }
    Ok(spectral_projector(eig, &SpectralWindow::closed(-cutoff, cutoff)))
}
