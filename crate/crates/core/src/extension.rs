//! Truncation from a reference basis of size `M` to a working basis of size
//! `N`, and the arctan-compactified extension pipeline
//! `A ↦ arctan(A) ↦ O arctan(A) O ↦ tg(O arctan(A) O)`.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::basis::BasisSpec;
use crate::operator::{
    apply_real_function, diagonalize, CMatrix, CVector, HermitianOperator, OperatorError,
};

/// Eigenvalues of the compactified operator within this distance of `±π/2`
/// are sent to zero by [`tg`].
pub const TG_SNAP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("working dimension {small} exceeds reference dimension {large}")]
    Dimensions { large: usize, small: usize },
    #[error("reference scale {large} and working scale {small} differ")]
    Scale { large: f64, small: f64 },
    #[error("expected length {expected}, got {found}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// A reference basis (`large`, dimension `M`) and the working basis (`small`,
/// dimension `N ≤ M`) it is truncated to. `N = M` is the identity truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPair {
    large: BasisSpec,
    small: BasisSpec,
}

impl TruncationPair {
    pub fn new(large: BasisSpec, small: BasisSpec) -> Result<Self, ExtensionError> {
        if small.dimension() > large.dimension() {
            return Err(ExtensionError::Dimensions {
                large: large.dimension(),
                small: small.dimension(),
            });
        }
        if small.scale() != large.scale() {
            return Err(ExtensionError::Scale {
                large: large.scale(),
                small: small.scale(),
            });
        }
        Ok(Self { large, small })
    }

    pub fn large(&self) -> &BasisSpec {
        &self.large
    }

    pub fn small(&self) -> &BasisSpec {
        &self.small
    }
}

fn check_length(found: usize, expected: usize) -> Result<(), ExtensionError> {
    if found != expected {
        return Err(ExtensionError::Length { expected, found });
    }
    Ok(())
}

/// Keeps the leading `N` coefficients.
pub fn truncate_vector(x: &CVector, pair: &TruncationPair) -> Result<CVector, ExtensionError> {
    check_length(x.len(), pair.large.dimension())?;
    Ok(x.rows(0, pair.small.dimension()).into_owned())
}

/// Pads a working-basis vector with zeros up to the reference dimension.
pub fn embed_vector(x: &CVector, pair: &TruncationPair) -> Result<CVector, ExtensionError> {
    check_length(x.len(), pair.small.dimension())?;
    let mut out = CVector::zeros(pair.large.dimension());
    out.rows_mut(0, x.len()).copy_from(x);
    Ok(out)
}

/// `‖x − embed(truncate(x))‖^2 = Σ_{n ≥ N} |c_n|^2`.
pub fn truncation_residual(x: &CVector, pair: &TruncationPair) -> Result<f64, ExtensionError> {
    check_length(x.len(), pair.large.dimension())?;
    Ok(x.iter()
        .skip(pair.small.dimension())
        .map(|c| c.norm_sqr())
        .sum())
}

/// `O A O`: the leading `N × N` principal block.
pub fn truncate_operator(
    a: &HermitianOperator,
    pair: &TruncationPair,
) -> Result<HermitianOperator, ExtensionError> {
    check_length(a.dimension(), pair.large.dimension())?;
    let n = pair.small.dimension();
    let block: CMatrix = a.matrix().view((0, 0), (n, n)).into_owned();
    Ok(HermitianOperator::from_hermitian_parts(block))
}

/// `tan(r · χ_(−π/2, π/2)(r))`, with the boundary snapped to zero.
pub fn tg(r: f64) -> f64 {
    if r.abs() < FRAC_PI_2 - TG_SNAP_TOLERANCE {
        r.tan()
    } else {
        0.0
    }
}

/// Output of [`compactified_extension`].
#[derive(Debug, Clone)]
pub struct CompactifiedExtension {
    /// `tg(O arctan(A) O)` on the working basis.
    pub operator: HermitianOperator,
    /// Ascending spectrum of the truncated compactified operator `O arctan(A) O`.
    pub compact_spectrum: Vec<f64>,
}

/// Applies `arctan` to the reference operator, truncates, and maps back with
/// [`tg`]. The intermediate spectrum lies in `[−π/2, π/2]` by interlacing.
pub fn compactified_extension(
    a_large: &HermitianOperator,
    pair: &TruncationPair,
) -> Result<CompactifiedExtension, ExtensionError> {
    check_length(a_large.dimension(), pair.large.dimension())?;
    let eig_large = diagonalize(a_large)?;
    let compact = apply_real_function(&eig_large, f64::atan)?;
    let truncated = truncate_operator(&compact, pair)?;
    let eig_small = diagonalize(&truncated)?;
    let operator = apply_real_function(&eig_small, tg)?;
    Ok(CompactifiedExtension {
        operator,
        compact_spectrum: eig_small.eigenvalues().to_vec(),
    })
}
