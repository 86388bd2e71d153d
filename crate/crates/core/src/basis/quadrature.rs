//! Gauss-Hermite quadrature for the weight e^(-x^2).
//!
//! Nodes are seeded from the eigenvalues of the symmetric Jacobi matrix and
//! polished by Newton steps on the normalized Hermite recurrence. Weights are
//! obtained from the Christoffel formula `w_k = e^(-x_k^2) / (n u_{n-1}(x_k)^2)`
//! evaluated with the Hermite *functions* `u_n`, so no intermediate quantity
//! overflows even at order 4096.

use super::{normalized_hermite_pair, BasisError};

/// Largest supported quadrature order.
pub const MAX_QUADRATURE_ORDER: usize = 4096;

/// A Gauss-Hermite rule: `∫ e^(-x^2) f(x) dx ≈ Σ w_k f(x_k)`.
///
/// `scaled_weights` holds `w_k e^(x_k^2)`, which is the form used to integrate
/// products of Hermite functions (they already carry their Gaussian factor).
/// For orders beyond a few hundred the outermost plain weights underflow to
/// zero while the scaled weights stay representable.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// `∫ e^(-x^2) f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `∫ g(x) dx` for an integrand that carries its own Gaussian decay.
    pub fn integrate_unweighted<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Builds the `order`-point Gauss-Hermite rule.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule, BasisError> {
    if order == 0 || order > MAX_QUADRATURE_ORDER {
        return Err(BasisError::QuadratureOrder(order));
    }
    let n = order;
    let nf = n as f64;

    // Jacobi matrix: zero diagonal, off-diagonal sqrt(k/2).
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut seeds = tridiagonal_eigenvalues(diag, off);
    seeds.sort_by(|a, b| a.total_cmp(b));

    let mut nodes = Vec::with_capacity(n);
    for &seed in &seeds {
        let mut x = seed;
        for _ in 0..12 {
            let (p, q) = normalized_hermite_pair(n, x);
            // h_n' = sqrt(2n) h_{n-1}; the common scale of (p, q) cancels.
            let step = p / ((2.0 * nf).sqrt() * q);
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        nodes.push(x);
    }

    // Enforce exact symmetry about the origin.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let r = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -r;
        nodes[j] = r;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut scaled_weights = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x in &nodes {
        let u_prev = super::hermite_function_unscaled(n - 1, x);
        let scaled = 1.0 / (nf * u_prev * u_prev);
        scaled_weights.push(scaled);
        weights.push(scaled * (-x * x).exp());
    }
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let s = 0.5 * (scaled_weights[i] + scaled_weights[j]);
        scaled_weights[i] = s;
        scaled_weights[j] = s;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }

    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights,
    })
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `off[k]` couples `k` and `k + 1`.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return d;
    }
    let mut e = off;
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_node_rule() {
        let rule = gauss_hermite_rule(1).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert!((rule.weights()[0] - PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_node_rule_matches_roots_of_h2() {
        // H_2(x) = 4x^2 - 2 has roots ±1/sqrt(2).
        let rule = gauss_hermite_rule(2).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((rule.nodes()[0] + r).abs() < 1e-15);
        assert!((rule.nodes()[1] - r).abs() < 1e-15);
    }

    #[test]
    fn total_mass_is_sqrt_pi() {
        for order in [1, 2, 3, 7, 20, 64, 128, 300, 1000, 4096] {
            let rule = gauss_hermite_rule(order).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!(
                (total - PI.sqrt()).abs() < 1e-12,
                "order {order}: sum {total}"
            );
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(rule.weights().iter().all(|&w| w >= 0.0));
            assert!(rule.scaled_weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn moments_are_exact_to_degree_2n_minus_1() {
        // ∫ x^(2k) e^(-x^2) = Γ(k + 1/2) = (2k-1)!! sqrt(pi) / 2^k
        let order = 10;
        let rule = gauss_hermite_rule(order).unwrap();
        let mut exact = PI.sqrt();
        for k in 0..order {
            let got = rule.integrate(|x| x.powi(2 * k as i32));
            assert!(
                ((got - exact) / exact).abs() < 1e-12,
                "moment {k}: {got} vs {exact}"
            );
            let odd = rule.integrate(|x| x.powi(2 * k as i32 + 1));
            assert!(odd.abs() < 1e-12 * exact.max(1.0));
            exact *= (2 * k + 1) as f64 / 2.0;
        }
    }

    #[test]
    fn rejects_out_of_range_orders() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(MAX_QUADRATURE_ORDER + 1).is_err());
    }

    #[test]
    fn unweighted_integral_of_gaussian() {
        let rule = gauss_hermite_rule(80).unwrap();
        // ∫ e^(-x^2/2) dx = sqrt(2 pi)
        let got = rule.integrate_unweighted(|x| (-0.5 * x * x).exp());
        assert!((got - (2.0 * PI).sqrt()).abs() < 1e-12);
    }
}
