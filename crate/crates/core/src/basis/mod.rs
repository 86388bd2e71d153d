//! Truncated Hermite-function basis and the matrix elements of position,
//! momentum, kinetic energy and potentials in it.
//!
//! The basis spans `u_0 .. u_{N-1}` with `u_n(x) = s^{-1/2} φ_n(x / s)`, where
//! `φ_n` are the orthonormal Hermite functions. Momentum is `p = -i d/dx`, the
//! kinetic operator is `p^2` (no factor 1/2), so `p^2 + q^2` is diagonal with
//! entries `2n + 1` at `s = 1`.

mod potential;
mod quadrature;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

use crate::operator::HermitianOperator;

pub use potential::{MonotoneCubic, PotentialSpec, MAX_POLYNOMIAL_DEGREE};
pub use quadrature::{gauss_hermite_rule, QuadratureRule, MAX_QUADRATURE_ORDER};

/// Highest Hermite-function index accepted by [`hermite_function_eval`].
pub const MAX_HERMITE_ORDER: usize = 8192;

// Magnitude at which the recurrence is renormalized.
const RESCALE_THRESHOLD: f64 = 1e200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("basis dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("basis scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("Hermite function order {order} exceeds the supported cap {cap}")]
    UnsupportedOrder { order: usize, cap: usize },
    #[error("quadrature order {0} outside 1..={MAX_QUADRATURE_ORDER}")]
    QuadratureOrder(usize),
    #[error("quadrature order {given} too small for this potential, need at least {required}")]
    QuadratureTooSmall { given: usize, required: usize },
    #[error("invalid potential: {0}")]
    Potential(String),
}

/// Truncation order and length unit of the Hermite basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    dimension: usize,
    scale: f64,
}

impl BasisSpec {
    pub fn new(dimension: usize, scale: f64) -> Result<Self, BasisError> {
        if dimension < 2 {
            return Err(BasisError::Dimension(dimension));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(BasisError::Scale(scale));
        }
        Ok(Self { dimension, scale })
    }

    /// Unit-scale basis.
    pub fn unit(dimension: usize) -> Result<Self, BasisError> {
        Self::new(dimension, 1.0)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same scale, different truncation order.
    pub fn with_dimension(&self, dimension: usize) -> Result<Self, BasisError> {
        Self::new(dimension, self.scale)
    }

    /// Default quadrature order `max(2N, 64)`.
    pub fn default_quadrature_order(&self) -> usize {
        (2 * self.dimension).max(64)
    }
}

/// `(h_n(x), h_{n-1}(x))` for the normalized Hermite polynomials, multiplied by
/// a common positive factor. Only their ratio and signs are meaningful.
pub(crate) fn normalized_hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for k in 1..=n {
        let kf = k as f64;
        let next = x * (2.0 / kf).sqrt() * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_THRESHOLD {
            cur /= RESCALE_THRESHOLD;
            prev /= RESCALE_THRESHOLD;
        }
    }
    (cur, prev)
}

/// `φ_n(x)` at unit scale, via the recurrence on the normalized functions with
/// the Gaussian factor folded into a running logarithmic scale.
pub(crate) fn hermite_function_unscaled(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut log_scale = -0.5 * x * x;
    for k in 1..=n {
        let kf = k as f64;
        let next = x * (2.0 / kf).sqrt() * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_THRESHOLD {
            cur /= RESCALE_THRESHOLD;
            prev /= RESCALE_THRESHOLD;
            log_scale += RESCALE_THRESHOLD.ln();
        }
    }
    cur * log_scale.exp()
}

/// `φ_0(x) .. φ_{count-1}(x)` at unit scale, each with the same stability
/// guarantees as [`hermite_function_unscaled`].
pub(crate) fn hermite_functions_unscaled(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut log_scale = -0.5 * x * x;
    let mut factor = log_scale.exp();
    out.push(cur * factor);
    for k in 1..count {
        let kf = k as f64;
        let next = x * (2.0 / kf).sqrt() * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_THRESHOLD {
            cur /= RESCALE_THRESHOLD;
            prev /= RESCALE_THRESHOLD;
            log_scale += RESCALE_THRESHOLD.ln();
            factor = log_scale.exp();
        }
        out.push(cur * factor);
    }
    out
}

/// Evaluates the basis function `u_n(x) = φ_n(x / s) / sqrt(s)`.
pub fn hermite_function_eval(n: usize, x: f64, spec: &BasisSpec) -> Result<f64, BasisError> {
    if n > MAX_HERMITE_ORDER {
        return Err(BasisError::UnsupportedOrder {
            order: n,
            cap: MAX_HERMITE_ORDER,
        });
    }
    Ok(hermite_function_unscaled(n, x / spec.scale) / spec.scale.sqrt())
}

/// `⟨u_m, q u_n⟩`: tridiagonal, zero diagonal, `s sqrt((n+1)/2)` off the diagonal.
pub fn position_matrix(spec: &BasisSpec) -> HermitianOperator {
    let n = spec.dimension;
    let s = spec.scale;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n - 1 {
        let v = s * ((k + 1) as f64 / 2.0).sqrt();
        m[(k, k + 1)] = v;
        m[(k + 1, k)] = v;
    }
    HermitianOperator::from_real_symmetric(m)
}

/// `⟨u_m, p u_n⟩` with `p = -i d/dx`:
/// `p u_n = (i / s) (sqrt((n+1)/2) u_{n+1} - sqrt(n/2) u_{n-1})`.
pub fn momentum_matrix(spec: &BasisSpec) -> HermitianOperator {
    let n = spec.dimension;
    let s = spec.scale;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n - 1 {
        let v = ((k + 1) as f64 / 2.0).sqrt() / s;
        m[(k + 1, k)] = Complex64::new(0.0, v);
        m[(k, k + 1)] = Complex64::new(0.0, -v);
    }
    HermitianOperator::from_hermitian_parts(m)
}

/// `⟨u_m, p^2 u_n⟩`, the truncation of `p^2` itself (pentadiagonal).
pub fn kinetic_matrix(spec: &BasisSpec) -> HermitianOperator {
    let n = spec.dimension;
    let inv_s2 = 1.0 / (spec.scale * spec.scale);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = (k as f64 + 0.5) * inv_s2;
        if k + 2 < n {
            let v = -0.5 * (((k + 1) * (k + 2)) as f64).sqrt() * inv_s2;
            m[(k, k + 2)] = v;
            m[(k + 2, k)] = v;
        }
    }
    HermitianOperator::from_real_symmetric(m)
}

/// The square of the truncated momentum, `(O p O)^2`.
pub fn squared_momentum_matrix(spec: &BasisSpec) -> HermitianOperator {
    let p = momentum_matrix(spec);
    let sq = p.matrix() * p.matrix();
    HermitianOperator::from_hermitian_parts(sq)
}

/// Where `O p^2 O` and `(O p O)^2` disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticDefect {
    /// Entries `(row, col, difference)` with nonzero difference.
    pub entries: Vec<(usize, usize, f64)>,
    /// Largest absolute difference inside the leading `(N-2) x (N-2)` block.
    pub leading_block_max: f64,
}

/// Compares the truncated kinetic operator against the squared truncated
/// momentum. Only the bottom-right corner differs: the missing intermediate
/// state `u_N` contributes `N / (2 s^2)` to entry `(N-1, N-1)`.
pub fn kinetic_defect(spec: &BasisSpec) -> KineticDefect {
    let n = spec.dimension;
    let k = kinetic_matrix(spec);
    let p2 = squared_momentum_matrix(spec);
    let mut entries = Vec::new();
    let mut leading_block_max = 0.0f64;
    for c in 0..n {
        for r in 0..n {
            let d = (k.matrix()[(r, c)] - p2.matrix()[(r, c)]).norm();
            if r + 2 < n && c + 2 < n {
                leading_block_max = leading_block_max.max(d);
            }
            if d > 1e-12 * (n as f64) {
                entries.push((r, c, d));
            }
        }
    }
    KineticDefect {
        entries,
        leading_block_max,
    }
}

/// `⟨u_m, V(q) u_n⟩` by Gauss-Hermite quadrature.
///
/// Polynomial potentials need `quad_order >= N + ceil(d/2) + 1` for their
/// matrix elements to be exact; every other kind needs `quad_order >= 2N`.
/// Smaller orders are refused rather than silently inaccurate.
pub fn potential_matrix(
    potential: &PotentialSpec,
    spec: &BasisSpec,
    quad_order: usize,
) -> Result<HermitianOperator, BasisError> {
    potential.validate()?;
    let n = spec.dimension;
    let required = potential.required_quadrature_order(n);
    if quad_order < required {
        return Err(BasisError::QuadratureTooSmall {
            given: quad_order,
            required,
        });
    }
    if potential.is_zero() {
        return Ok(HermitianOperator::zeros(n));
    }
    let rule = gauss_hermite_rule(quad_order)?;
    let s = spec.scale;

    // W = U^T diag(w V) U with U[k][j] = φ_j(x_k).
    let rows: Vec<(Vec<f64>, f64)> = rule
        .nodes()
        .par_iter()
        .zip(rule.scaled_weights().par_iter())
        .map(|(&x, &w)| (hermite_functions_unscaled(n, x), w * potential.evaluate(s * x)))
        .collect();

    let q = rows.len();
    let mut left = DMatrix::<f64>::zeros(n, q);
    let mut right = DMatrix::<f64>::zeros(q, n);
    for (k, (values, coeff)) in rows.iter().enumerate() {
        for (j, &u) in values.iter().enumerate() {
            left[(j, k)] = u * coeff;
            right[(k, j)] = u;
        }
    }
    let m = left * right;
    Ok(HermitianOperator::from_real_symmetric(m))
}

/// Hermite coefficients `⟨u_n, ψ⟩` of a wave function given on the real line,
/// computed with `quad_order` Gauss-Hermite nodes.
pub fn project_function<F>(
    psi: F,
    spec: &BasisSpec,
    quad_order: usize,
) -> Result<Vec<Complex64>, BasisError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let rule = gauss_hermite_rule(quad_order)?;
    let n = spec.dimension;
    let s = spec.scale;
    let partial: Vec<Vec<Complex64>> = rule
        .nodes()
        .par_iter()
        .zip(rule.scaled_weights().par_iter())
        .map(|(&x, &w)| {
            let f = psi(s * x) * (w * s.sqrt());
            hermite_functions_unscaled(n, x)
                .into_iter()
                .map(|u| f * u)
                .collect()
        })
        .collect();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for row in &partial {
        for (c, v) in coeffs.iter_mut().zip(row) {
            *c += v;
        }
    }
    Ok(coeffs)
}

/// Normalized Gaussian packet `(2π σ^2)^{-1/4} exp(-(x-c)^2/(4σ^2) + i k x)`.
pub fn gaussian_packet(center: f64, width: f64, momentum: f64) -> impl Fn(f64) -> Complex64 + Sync {
    let norm = (2.0 * PI * width * width).powf(-0.25);
    move |x: f64| {
        let d = x - center;
        let envelope = norm * (-(d * d) / (4.0 * width * width)).exp();
        Complex64::from_polar(envelope, momentum * x)
    }
}
