//! Regularized scattering theory for a pair `B = B₀ + V` of truncated
//! Hamiltonians.
//!
//! Notation: `{(λ_j, x_j)}` is the eigensystem of the free operator `B₀`,
//! `{(μ_i, y_i)}` the eigensystem of `B`, and `Y_t = e^{iBt} e^{−iB₀t}`.
//! `W⁺` is the limit `t → −∞` (state prepared in the remote past) and `W⁻`
//! the limit `t → +∞`. A finite `ε > 0` stands in for an infinitesimal and
//! the grid horizon `t_max` for the infinite preparation/detection times.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::{
    diagonalize, evolve, max_norm, vector_norm, CMatrix, CVector, EigenSystem, HermitianOperator,
    OperatorError,
};

/// Times at which the intertwining defect is reported.
pub const INTERTWINING_TIMES: [f64; 3] = [1.0, 2.0, 5.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("time horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("time grid must be non-empty, finite and strictly increasing")]
    Grid,
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("state must be normalized (norm {0})")]
    NotNormalized(f64),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// `W⁺` (`t → −∞`) or `W⁻` (`t → +∞`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    /// Sign `±` in `ε ± i(μ − λ)` and `λ − B ± iε`.
    fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    /// `Y_{∓t}`: the propagator time for grid time `t`.
    fn propagator_time(self, t: f64) -> f64 {
        -self.sign() * t
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Plus => "plus",
            Direction::Minus => "minus",
        }
    }
}

/// Free and interacting Hamiltonians with their eigensystems.
#[derive(Debug, Clone)]
pub struct ScatteringPair {
    free: HermitianOperator,
    full: HermitianOperator,
    interaction: HermitianOperator,
    eig_free: EigenSystem,
    eig_full: EigenSystem,
    // ⟨y_i, x_j⟩
    overlap: CMatrix,
}

impl ScatteringPair {
    pub fn new(free: HermitianOperator, full: HermitianOperator) -> Result<Self, ScatteringError> {
        let interaction = full.sub(&free)?;
        let eig_free = diagonalize(&free)?;
        let eig_full = diagonalize(&full)?;
        let overlap = eig_full.eigenvectors().ad_mul(eig_free.eigenvectors());
        Ok(Self {
            free,
            full,
            interaction,
            eig_free,
            eig_full,
            overlap,
        })
    }

    /// `B = B₀ + V`; the stored interaction is recomputed as `B − B₀`.
    pub fn from_interaction(
        free: HermitianOperator,
        interaction: &HermitianOperator,
    ) -> Result<Self, ScatteringError> {
        let full = free.add(interaction)?;
        Self::new(free, full)
    }

    pub fn dimension(&self) -> usize {
        self.free.dimension()
    }

    pub fn free(&self) -> &HermitianOperator {
        &self.free
    }

    pub fn full(&self) -> &HermitianOperator {
        &self.full
    }

    pub fn interaction(&self) -> &HermitianOperator {
        &self.interaction
    }

    pub fn eig_free(&self) -> &EigenSystem {
        &self.eig_free
    }

    pub fn eig_full(&self) -> &EigenSystem {
        &self.eig_full
    }

    /// Converts an operator to the free eigenbasis: `X† A X`.
    pub fn to_free_basis(&self, a: &CMatrix) -> CMatrix {
        let x = self.eig_free.eigenvectors();
        x.ad_mul(&(a * x))
    }

    /// `Y† A X`: rows indexed by interacting eigenvectors, columns by free ones.
    fn to_mixed_basis(&self, a: &CMatrix) -> CMatrix {
        self.eig_full
            .eigenvectors()
            .ad_mul(&(a * self.eig_free.eigenvectors()))
    }

    /// `Y M X†`.
    fn mixed_to_operator(&self, m: &CMatrix) -> CMatrix {
        self.eig_full.eigenvectors() * m * self.eig_free.eigenvectors().adjoint()
    }
}

/// Regularization and time-grid settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringConfig {
    epsilon: f64,
    t_grid: Vec<f64>,
    tolerance: f64,
}

impl ScatteringConfig {
    /// Explicit grid; `t_max` is its last point.
    pub fn new(epsilon: f64, t_grid: Vec<f64>, tolerance: f64) -> Result<Self, ScatteringError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ScatteringError::Epsilon(epsilon));
        }
        if t_grid.is_empty()
            || t_grid.iter().any(|t| !t.is_finite() || *t < 0.0)
            || t_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(ScatteringError::Grid);
        }
        let t_max = *t_grid.last().unwrap();
        if t_max <= 0.0 {
            return Err(ScatteringError::Horizon(t_max));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(ScatteringError::Tolerance(tolerance));
        }
        Ok(Self {
            epsilon,
            t_grid,
            tolerance,
        })
    }

    /// `steps + 1` equally spaced times `0, t_max/steps, ..., t_max`.
    pub fn uniform(
        epsilon: f64,
        t_max: f64,
        steps: usize,
        tolerance: f64,
    ) -> Result<Self, ScatteringError> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(ScatteringError::Horizon(t_max));
        }
        if steps == 0 {
            return Err(ScatteringError::Grid);
        }
        let grid = (0..=steps)
            .map(|k| t_max * k as f64 / steps as f64)
            .collect();
        Self::new(epsilon, grid, tolerance)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t_max(&self) -> f64 {
        *self.t_grid.last().unwrap()
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, ScatteringError> {
        Self::new(epsilon, self.t_grid.clone(), self.tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveMethod {
    TimeLimit,
    AbelAverage,
    Resolvent,
}

impl WaveMethod {
    pub fn label(self) -> &'static str {
        match self {
            WaveMethod::TimeLimit => "time_limit",
            WaveMethod::AbelAverage => "abel_average",
            WaveMethod::Resolvent => "resolvent",
        }
    }
}

/// A candidate wave operator in the truncated basis.
#[derive(Debug, Clone)]
pub struct WaveOperatorResult {
    pub matrix: CMatrix,
    pub method: WaveMethod,
    pub direction: Direction,
    /// Time limit: max-norm change of `Y_{∓t}` between grid points.
    /// Abel and resolvent: intertwining defects at [`INTERTWINING_TIMES`].
    pub diagnostics: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Convergent,
    Divergent,
}

/// Outcome of following `Y_{∓t} x` along the time grid.
#[derive(Debug, Clone)]
pub struct WaveLimit {
    pub verdict: Verdict,
    /// `‖Y_{∓t_k} x − Y_{∓t_{k−1}} x‖` for `k ≥ 1`.
    pub residuals: Vec<f64>,
    /// The final vector, present only for a convergent verdict.
    pub limit: Option<CVector>,
    /// First grid time from which every later residual is below tolerance.
    pub settle_time: Option<f64>,
}

/// `‖A X‖` restricted to columns, in the spectral norm.
fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// `Y_t x = e^{iBt} e^{−iB₀t} x`.
pub fn propagator_product(
    pair: &ScatteringPair,
    t: f64,
    x: &CVector,
) -> Result<CVector, ScatteringError> {
    let free = evolve(&pair.eig_free, t, x)?;
    Ok(evolve(&pair.eig_full, -t, &free)?)
}

/// Follows `Y_{∓t} x` over the grid and decides whether it settles.
///
/// The verdict is convergent iff the successive differences in the last
/// quarter of the grid all stay below the tolerance.
pub fn detect_wave_limit(
    pair: &ScatteringPair,
    x: &CVector,
    config: &ScatteringConfig,
    direction: Direction,
) -> Result<WaveLimit, ScatteringError> {
    if x.len() != pair.dimension() {
        return Err(OperatorError::DimensionMismatch {
            expected: pair.dimension(),
            found: x.len(),
        }
        .into());
    }
    let norm = vector_norm(x);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(ScatteringError::NotNormalized(norm));
    }

    let free_coeffs = pair.eig_free.eigenvectors().ad_mul(x);
    let lam = pair.eig_free.eigenvalues();
    let mu = pair.eig_full.eigenvalues();
    let state_at = |t: f64| -> CVector {
        let s = direction.propagator_time(t);
        let mut c = free_coeffs.clone();
        for (z, &l) in c.iter_mut().zip(lam) {
            *z *= Complex64::from_polar(1.0, -l * s);
        }
        let mut d = &pair.overlap * c;
        for (z, &m) in d.iter_mut().zip(mu) {
            *z *= Complex64::from_polar(1.0, m * s);
        }
        pair.eig_full.eigenvectors() * d
    };

    let grid = config.t_grid();
    let mut previous = state_at(grid[0]);
    let mut residuals = Vec::with_capacity(grid.len().saturating_sub(1));
    for &t in &grid[1..] {
        let current = state_at(t);
        residuals.push(vector_norm(&(&current - &previous)));
        previous = current;
    }

    let tol = config.tolerance();
    let tail = residuals.len().div_ceil(4);
    let convergent = residuals[residuals.len() - tail..].iter().all(|&r| r < tol);
    let settle_index = residuals.iter().rposition(|&r| r >= tol).map_or(0, |i| i + 1);
    let (verdict, limit, settle_time) = if convergent {
        (Verdict::Convergent, Some(previous), Some(grid[settle_index]))
    } else {
        (Verdict::Divergent, None, None)
    };
    Ok(WaveLimit {
        verdict,
        residuals,
        limit,
        settle_time,
    })
}

/// `Y_{∓t_max}` as a full matrix; diagnostics are the grid-to-grid changes.
pub fn moller_time_limit(
    pair: &ScatteringPair,
    config: &ScatteringConfig,
    direction: Direction,
) -> WaveOperatorResult {
    let propagator = |t: f64| -> CMatrix {
        let s = direction.propagator_time(t);
        let mut m = pair.overlap.clone();
        for (i, &mu) in pair.eig_full.eigenvalues().iter().enumerate() {
            for (j, &lam) in pair.eig_free.eigenvalues().iter().enumerate() {
                m[(i, j)] *= Complex64::from_polar(1.0, (mu - lam) * s);
            }
        }
        pair.mixed_to_operator(&m)
    };
    let grid = config.t_grid();
    let mut previous = propagator(grid[0]);
    let mut diagnostics = Vec::new();
    for &t in &grid[1..] {
        let current = propagator(t);
        diagnostics.push(max_norm(&(&current - &previous)));
        previous = current;
    }
    WaveOperatorResult {
        matrix: previous,
        method: WaveMethod::TimeLimit,
        direction,
        diagnostics,
    }
}

/// Abel average `∫₀^∞ ε e^{−εs} Y_{∓s} ds`, evaluated in closed form:
/// `⟨y_i, W x_j⟩ = ⟨y_i, x_j⟩ · ε / (ε ± i(μ_i − λ_j))`.
pub fn moller_abel_average(
    pair: &ScatteringPair,
    config: &ScatteringConfig,
    direction: Direction,
) -> WaveOperatorResult {
    let eps = config.epsilon();
    let sign = direction.sign();
    let mut m = pair.overlap.clone();
    for (i, &mu) in pair.eig_full.eigenvalues().iter().enumerate() {
        for (j, &lam) in pair.eig_free.eigenvalues().iter().enumerate() {
            m[(i, j)] *= eps / Complex64::new(eps, sign * (mu - lam));
        }
    }
    let matrix = pair.mixed_to_operator(&m);
    let diagnostics = intertwining_defects(pair, &matrix, None);
    WaveOperatorResult {
        matrix,
        method: WaveMethod::AbelAverage,
        direction,
        diagnostics,
    }
}

/// `W± = Σ_j (1 + (λ_j − B ± iε)^{−1} V) |x_j⟩⟨x_j|`, with each resolvent applied
/// through the eigensystem of `B`.
pub fn moller_resolvent(
    pair: &ScatteringPair,
    config: &ScatteringConfig,
    direction: Direction,
) -> WaveOperatorResult {
    let eps = config.epsilon();
    let sign = direction.sign();
    // Column j of `coupling` is Y† V x_j.
    let mut coupling = pair.to_mixed_basis(pair.interaction.matrix());
    for (i, &mu) in pair.eig_full.eigenvalues().iter().enumerate() {
        for (j, &lam) in pair.eig_free.eigenvalues().iter().enumerate() {
            coupling[(i, j)] /= Complex64::new(lam - mu, sign * eps);
        }
    }
    let x = pair.eig_free.eigenvectors();
    let matrix = x * x.adjoint() + pair.mixed_to_operator(&coupling);
    let diagnostics = intertwining_defects(pair, &matrix, None);
    WaveOperatorResult {
        matrix,
        method: WaveMethod::Resolvent,
        direction,
        diagnostics,
    }
}

/// `‖(e^{iBt} W − W e^{iB₀t}) P‖` in the spectral norm, where `P` projects
/// onto the free eigenvectors listed in `columns` (all of them when `None`).
pub fn intertwining_defect(
    pair: &ScatteringPair,
    w: &CMatrix,
    t: f64,
    columns: Option<&[usize]>,
) -> f64 {
    let m = pair.to_mixed_basis(w);
    let all: Vec<usize>;
    let cols = match columns {
        Some(c) => c,
        None => {
            all = (0..pair.dimension()).collect();
            &all
        }
    };
    let mu = pair.eig_full.eigenvalues();
    let lam = pair.eig_free.eigenvalues();
    let mut d = CMatrix::zeros(m.nrows(), cols.len());
    for (c, &j) in cols.iter().enumerate() {
        let right = Complex64::from_polar(1.0, lam[j] * t);
        for i in 0..m.nrows() {
            d[(i, c)] = m[(i, j)] * (Complex64::from_polar(1.0, mu[i] * t) - right);
        }
    }
    spectral_norm(&d)
}

fn intertwining_defects(pair: &ScatteringPair, w: &CMatrix, columns: Option<&[usize]>) -> Vec<f64> {
    INTERTWINING_TIMES
        .iter()
        .map(|&t| intertwining_defect(pair, w, t, columns))
        .collect()
}

/// T-matrix in the free eigenbasis, evaluated two ways.
#[derive(Debug, Clone)]
pub struct TMatrix {
    /// `⟨x_j, (Y⁺B₀ − B₀Y⁺) x_k⟩`.
    pub matrix: CMatrix,
    /// `(λ_k − λ_j) ⟨x_j, Y⁺ x_k⟩`.
    pub weighted: CMatrix,
    /// `‖matrix − weighted‖_max`.
    pub dual_gap: f64,
}

/// `T_{j,k} = ⟨x_j, [Y⁺, B₀] x_k⟩` with the resolvent-form `Y⁺`.
pub fn t_matrix(pair: &ScatteringPair, config: &ScatteringConfig) -> TMatrix {
    let w = moller_resolvent(pair, config, Direction::Plus).matrix;
    t_matrix_from(pair, &w)
}

fn t_matrix_from(pair: &ScatteringPair, w_plus: &CMatrix) -> TMatrix {
    let b0 = pair.free.matrix();
    let commutator = w_plus * b0 - b0 * w_plus;
    let matrix = pair.to_free_basis(&commutator);
    let mut weighted = pair.to_free_basis(w_plus);
    let lam = pair.eig_free.eigenvalues();
    for k in 0..weighted.ncols() {
        for j in 0..weighted.nrows() {
            weighted[(j, k)] *= lam[k] - lam[j];
        }
    }
    let dual_gap = max_norm(&(&matrix - &weighted));
    TMatrix {
        matrix,
        weighted,
        dual_gap,
    }
}

/// `δ_ε(x) = ε / (π (x² + ε²))`.
pub fn lorentzian_delta(x: f64, epsilon: f64) -> f64 {
    epsilon / (PI * (x * x + epsilon * epsilon))
}

/// S-matrix in the free eigenbasis, evaluated two ways.
#[derive(Debug, Clone)]
pub struct SMatrix {
    /// `δ_{jk} − 2πi δ_ε(λ_j − λ_k) T_{jk}`.
    pub born_like: CMatrix,
    /// `⟨x_j, (Y⁻)† Y⁺ x_k⟩`.
    pub direct: CMatrix,
    /// `‖born_like − direct‖_max` over the whole matrix.
    pub discrepancy: f64,
}

impl SMatrix {
    /// Max-norm discrepancy restricted to the block `indices × indices`.
    pub fn discrepancy_on(&self, indices: &[usize]) -> f64 {
        let mut d = 0.0f64;
        for &j in indices {
            for &k in indices {
                d = d.max((self.born_like[(j, k)] - self.direct[(j, k)]).norm());
            }
        }
        d
    }

    /// `‖(S†S − 1)` restricted to `indices × indices` in the max norm, using
    /// the direct S-matrix.
    pub fn unitarity_defect_on(&self, indices: &[usize]) -> f64 {
        let mut d = 0.0f64;
        for &j in indices {
            for &k in indices {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..self.direct.nrows() {
                    acc += self.direct[(r, j)].conj() * self.direct[(r, k)];
                }
                if j == k {
                    acc -= 1.0;
                }
                d = d.max(acc.norm());
            }
        }
        d
    }
}

pub fn s_matrix(pair: &ScatteringPair, config: &ScatteringConfig) -> SMatrix {
    let eps = config.epsilon();
    let w_plus = moller_resolvent(pair, config, Direction::Plus).matrix;
    let w_minus = moller_resolvent(pair, config, Direction::Minus).matrix;
    let t = t_matrix_from(pair, &w_plus);
    let lam = pair.eig_free.eigenvalues();
    let n = pair.dimension();
    let mut born_like = CMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let delta = if j == k { 1.0 } else { 0.0 };
            born_like[(j, k)] = Complex64::new(delta, 0.0)
                - Complex64::new(0.0, 2.0 * PI * lorentzian_delta(lam[j] - lam[k], eps))
                    * t.matrix[(j, k)];
        }
    }
    let x = pair.eig_free.eigenvectors();
    let direct = (&w_minus * x).ad_mul(&(&w_plus * x));
    let discrepancy = max_norm(&(&born_like - &direct));
    SMatrix {
        born_like,
        direct,
        discrepancy,
    }
}

/// Free eigen-indices whose eigenvalue lies in `[lo, hi]`.
pub fn continuum_indices(eig_free: &EigenSystem, lo: f64, hi: f64) -> Vec<usize> {
    eig_free
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= lo && l <= hi)
        .map(|(i, _)| i)
        .collect()
}

/// Operational range for `ε` at a given energy: above the local free level
/// spacing and below the energy itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonWindow {
    pub local_spacing: f64,
    pub energy: f64,
}

impl EpsilonWindow {
    /// Uses the gap between the two free eigenvalues bracketing `energy`.
    pub fn at_energy(eig_free: &EigenSystem, energy: f64) -> Self {
        let lam = eig_free.eigenvalues();
        let idx = lam.partition_point(|&l| l < energy).clamp(1, lam.len() - 1);
        Self {
            local_spacing: lam[idx] - lam[idx - 1],
            energy,
        }
    }

    pub fn contains(&self, epsilon: f64) -> bool {
        epsilon > self.local_spacing && epsilon < self.energy
    }

    /// Geometric midpoint of the window.
    pub fn midpoint(&self) -> f64 {
        (self.local_spacing * self.energy).sqrt()
    }
}
