//! Windowed S-matrix discrepancy, unitarity defect and intertwining defect
//! along an (N, ε) ladder for a weak gaussian barrier.
//!
//! Usage: `scattering_study [amplitude] [scale] [eps64] [exponent]` where
//! ε(N) = eps64 · (N/64)^(−exponent).

use hermite_qm::basis::{kinetic_matrix, potential_matrix, BasisSpec, PotentialSpec};
use hermite_qm::scattering::{
    continuum_indices, intertwining_defect, moller_resolvent, s_matrix, Direction, EpsilonWindow,
    ScatteringConfig, ScatteringPair, INTERTWINING_TIMES,
};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("numeric argument"))
        .collect();
    let get = |i: usize, d: f64| args.get(i).copied().unwrap_or(d);
    let (amplitude, scale, eps64, exponent) = (get(0, 0.5), get(1, 2.0), get(2, 1.0), get(3, 0.25));
    let (lo, hi) = (2.0, 8.0);
    println!("N,epsilon,local_spacing,in_window,window_size,discrepancy,unitarity_defect,intertwining_t1,intertwining_t2,intertwining_t5");
    for n in [64usize, 128, 256] {
        let spec = BasisSpec::new(n, scale).unwrap();
        let v = potential_matrix(&PotentialSpec::gaussian(amplitude, 1.0), &spec, 2 * n).unwrap();
        let pair = ScatteringPair::from_interaction(kinetic_matrix(&spec), &v).unwrap();
        let eps = eps64 * (n as f64 / 64.0).powf(-exponent);
        let window = EpsilonWindow::at_energy(pair.eig_free(), 0.5 * (lo + hi));
        let cfg = ScatteringConfig::uniform(eps, 1.0, 1, 1e-3).unwrap();
        let idx = continuum_indices(pair.eig_free(), lo, hi);
        let s = s_matrix(&pair, &cfg);
        let w = moller_resolvent(&pair, &cfg, Direction::Plus).matrix;
        let d: Vec<String> = INTERTWINING_TIMES
            .iter()
            .map(|&t| format!("{:.6e}", intertwining_defect(&pair, &w, t, Some(&idx))))
            .collect();
        println!(
            "{n},{eps:.6},{:.6},{},{},{:.6e},{:.6e},{}",
            window.local_spacing,
            window.contains(eps),
            idx.len(),
            s.discrepancy_on(&idx),
            s.unitarity_defect_on(&idx),
            d.join(",")
        );
    }
}
