use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{max_norm, CMatrix, HermitianOperator, OperatorError};

/// Relative eigenvalue gap (in units of the spectral spread) below which
/// neighbouring eigenvalues are treated as one degenerate cluster.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;
const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EigenSystem {
    /// Assembles an eigensystem from parts, checking order, finiteness and
    /// orthonormality of the columns.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: CMatrix) -> Result<Self, OperatorError> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(OperatorError::InvalidEigenSystem(format!(
                "{} eigenvalues but a {}x{} eigenvector matrix",
                n,
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.iter().any(|v| !v.is_finite())
            || eigenvectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(OperatorError::InvalidEigenSystem("non-finite entries".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(OperatorError::InvalidEigenSystem(
                "eigenvalues are not ascending".into(),
            ));
        }
        let defect = orthonormality_defect(&eigenvectors);
        if defect > ORTHONORMALITY_TOLERANCE {
            return Err(OperatorError::InvalidEigenSystem(format!(
                "eigenvectors not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Eigenvector `j` as a column vector.
    pub fn eigenvector(&self, j: usize) -> super::CVector {
        self.eigenvectors.column(j).into_owned()
    }

    /// `max |λ_i|`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `X Λ X†`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(lam);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `‖X†X − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.eigenvectors)
    }
}

fn orthonormality_defect(x: &CMatrix) -> f64 {
    let n = x.ncols();
    let gram = x.adjoint() * x;
    max_norm(&(gram - CMatrix::identity(n, n)))
}

/// Diagonalizes a Hermitian operator.
///
/// Real symmetric input takes the real solver path. Eigenvalues come back
/// ascending; the basis of every numerically degenerate cluster is rebuilt
/// from the cluster projector by pivoted Gram-Schmidt in index order, and
/// every other eigenvector is phased so its largest component is real and
/// positive. Results are therefore reproducible for a given build.
pub fn diagonalize(b: &HermitianOperator) -> Result<EigenSystem, OperatorError> {
    let n = b.dimension();
    let max_iter = 1000 * n.max(1);
    let (values, vectors): (Vec<f64>, CMatrix) = if b.is_real() {
        let real: DMatrix<f64> = b.matrix().map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, max_iter)
            .ok_or(OperatorError::NoConvergence {
                residual: f64::INFINITY,
            })?;
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::try_new(b.matrix().clone(), f64::EPSILON, max_iter)
            .ok_or(OperatorError::NoConvergence {
                residual: f64::INFINITY,
            })?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }

    canonicalize(&eigenvalues, &mut eigenvectors);

    let system = EigenSystem {
        eigenvalues,
        eigenvectors,
    };
    let ortho = system.orthonormality_defect();
    let recon = max_norm(&(system.reconstruct() - b.matrix()));
    let allowed = RECONSTRUCTION_TOLERANCE * system.spectral_radius();
    if ortho > ORTHONORMALITY_TOLERANCE || recon > allowed {
        return Err(OperatorError::NoConvergence {
            residual: recon.max(ortho),
        });
    }
    Ok(system)
}

fn canonicalize(eigenvalues: &[f64], vectors: &mut CMatrix) {
    let n = eigenvalues.len();
    if n == 0 {
        return;
    }
    let spread = eigenvalues[n - 1] - eigenvalues[0];
    let gap = DEGENERACY_TOLERANCE * spread;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] <= gap {
            end += 1;
        }
        if end - start == 1 {
            fix_phase(vectors, start);
        } else {
            rebuild_cluster(vectors, start, end);
        }
        start = end;
    }
}

fn fix_phase(vectors: &mut CMatrix, col: usize) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in vectors.column(col).iter().enumerate() {
        let m = z.norm();
        if m > best_norm {
            best_norm = m;
            best = i;
        }
    }
    if best_norm > 0.0 {
        let z = vectors[(best, col)];
        let phase = z.conj() / z.norm();
        for v in vectors.column_mut(col).iter_mut() {
            *v *= phase;
        }
        vectors[(best, col)] = Complex64::new(vectors[(best, col)].norm(), 0.0);
    }
}

/// Replaces columns `start..end` by an orthonormal basis of their span drawn
/// from the columns of the cluster projector, choosing at each step the
/// projector column with the largest remaining norm (lowest index on ties).
fn rebuild_cluster(vectors: &mut CMatrix, start: usize, end: usize) {
    let n = vectors.nrows();
    let k = end - start;
    let block = vectors.columns(start, k).into_owned();
    let projector = &block * block.adjoint();

    let mut candidates: Vec<nalgebra::DVector<Complex64>> =
        (0..n).map(|j| projector.column(j).into_owned()).collect();
    let mut chosen: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(k);
    let mut used = vec![false; n];

    for _ in 0..k {
        let mut best = usize::MAX;
        let mut best_norm = -1.0;
        for (j, c) in candidates.iter().enumerate() {
            if used[j] {
                continue;
            }
            let m = c.norm();
            if m > best_norm {
                best_norm = m;
                best = j;
            }
        }
        used[best] = true;
        let mut q = candidates[best].clone();
        // Second pass against the already chosen vectors.
        for prev in &chosen {
            let overlap = prev.dotc(&q);
            q -= prev * overlap;
        }
        let norm = q.norm();
        q /= Complex64::new(norm, 0.0);
        for (j, c) in candidates.iter_mut().enumerate() {
            if !used[j] {
                let overlap = q.dotc(c);
                *c -= &q * overlap;
            }
        }
        chosen.push(q);
    }
    for (offset, q) in chosen.into_iter().enumerate() {
        vectors.set_column(start + offset, &q);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_sorted() {
        let b = HermitianOperator::from_diagonal(&[3.0, 1.0, 2.0]);
        let e = diagonalize(&b).unwrap();
        assert_eq!(e.eigenvalues(), &[1.0, 2.0, 3.0]);
        let expected_rows = [1, 2, 0];
        for (col, &row) in expected_rows.iter().enumerate() {
            assert!((e.eigenvectors()[(row, col)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_is_degenerate_but_reconstructs() {
        for n in [1, 2, 5, 17] {
            let b = HermitianOperator::identity(n);
            let e = diagonalize(&b).unwrap();
            assert!(e.eigenvalues().iter().all(|&v| (v - 1.0).abs() < 1e-15));
            assert!(e.orthonormality_defect() < 1e-14);
            assert!(max_norm(&(e.reconstruct() - b.matrix())) < 1e-14);
        }
    }

    #[test]
    fn complex_hermitian_path() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.0, -1.0);
        m[(1, 0)] = Complex64::new(0.0, 1.0);
        let b = HermitianOperator::new(m).unwrap();
        assert!(!b.is_real());
        let e = diagonalize(&b).unwrap();
        assert!((e.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues()[1] - 1.0).abs() < 1e-14);
        assert!(max_norm(&(e.reconstruct() - b.matrix())) < 1e-14);
    }

    #[test]
    fn degenerate_cluster_is_reproducible() {
        // Two rotations of the same degenerate eigenspace give one basis.
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = CMatrix::zeros(3, 3);
        u[(0, 0)] = Complex64::new(c, 0.0);
        u[(1, 0)] = Complex64::new(0.0, c);
        u[(0, 1)] = Complex64::new(0.0, c);
        u[(1, 1)] = Complex64::new(c, 0.0);
        u[(2, 2)] = Complex64::new(1.0, 0.0);
        let d = HermitianOperator::from_diagonal(&[2.0, 2.0, 5.0]);
        let rotated = HermitianOperator::new(&u * d.matrix() * u.adjoint()).unwrap();
        let a = diagonalize(&d).unwrap();
        let b = diagonalize(&rotated).unwrap();
        assert!(max_norm(&(a.eigenvectors() - b.eigenvectors())) < 1e-12);
    }

    #[test]
    fn rejects_malformed_parts() {
        let x = CMatrix::identity(2, 2);
        assert!(EigenSystem::new(vec![2.0, 1.0], x.clone()).is_err());
        assert!(EigenSystem::new(vec![1.0], x.clone()).is_err());
        let mut y = x.clone();
        y[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(EigenSystem::new(vec![1.0, 2.0], y).is_err());
        assert!(EigenSystem::new(vec![1.0, 2.0], x).is_ok());
    }
}
