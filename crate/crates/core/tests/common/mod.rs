#![allow(dead_code)]

use hermite_qm::operator::{diagonalize, CMatrix, HermitianOperator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Hermitian matrix with entries of order `scale`.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HermitianOperator {
    let a = CMatrix::from_fn(n, n, |_, _| random_complex(rng));
    let h = (&a + a.adjoint()) * Complex64::new(0.5 * scale, 0.0);
    HermitianOperator::new(h).unwrap()
}

/// Random unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    diagonalize(&random_hermitian(rng, n, 1.0)).unwrap().eigenvectors().clone()
}

/// `U diag(values) U†` for a random unitary `U`.
pub fn with_spectrum(rng: &mut ChaCha8Rng, values: &[f64]) -> HermitianOperator {
    let n = values.len();
    let u = random_unitary(rng, n);
    let mut d = u.clone();
    for (j, &v) in values.iter().enumerate() {
        for z in d.column_mut(j).iter_mut() {
            *z *= v;
        }
    }
    HermitianOperator::new(d * u.adjoint()).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> hermite_qm::CVector {
    hermite_qm::CVector::from_fn(n, |_, _| random_complex(rng))
}

pub fn normalized(x: hermite_qm::CVector) -> hermite_qm::CVector {
    let n = x.norm();
    x / Complex64::new(n, 0.0)
}
