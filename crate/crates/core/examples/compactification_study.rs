//! Lowest N/2 eigenvalues of the compactified oscillator (M = 2N) against
//! direct truncation at N.

use hermite_qm::basis::{kinetic_matrix, potential_matrix, BasisSpec, PotentialSpec};
use hermite_qm::extension::{compactified_extension, TruncationPair};
use hermite_qm::operator::diagonalize;

fn main() {
    for n in [16usize, 32, 64, 128] {
        let large = BasisSpec::unit(2 * n).unwrap();
        let small = BasisSpec::unit(n).unwrap();
        let h = |s: &BasisSpec| {
            kinetic_matrix(s)
                .add(&potential_matrix(&PotentialSpec::harmonic(), s, s.default_quadrature_order()).unwrap())
                .unwrap()
        };
        let pair = TruncationPair::new(large, small).unwrap();
        let ext = compactified_extension(&h(&large), &pair).unwrap();
        let e_ext = diagonalize(&ext.operator).unwrap();
        let e_dir = diagonalize(&h(&small)).unwrap();
        let ext_vals = e_ext.eigenvalues();
        let mut worst = 0.0f64;
        let mut worst_rel = 0.0f64;
        for (e, d0) in ext_vals.iter().zip(e_dir.eigenvalues()).take(n / 2) {
            let d = (e - d0).abs();
            worst = worst.max(d);
            worst_rel = worst_rel.max(d / d0);
        }
        println!("N={n} abs={worst:.3e} rel={worst_rel:.3e} top={:.6}", e_dir.eigenvalues()[n / 2 - 1]);
    }
}
