//! Quantum mechanics in a truncated Hermite-function basis.
//!
//! The crate builds finite matrix truncations of one-dimensional Schrödinger
//! operators, diagonalizes them, and works with the resulting eigensystems:
//! spectral projectors and measures, the function calculus, compactified
//! extensions of unbounded operators, and ε-regularized scattering theory
//! (Møller wave operators, T-matrix and S-matrix).
//!
//! Every quantity that would be infinite or infinitesimal in the continuum
//! theory is a finite parameter here: the truncation order `N`, the
//! regularization `ε` and the time horizon `T`. Accuracy statements are made
//! through convergence studies in these parameters.

pub mod basis;
pub mod extension;
pub mod io;
pub mod operator;
pub mod scattering;

pub use basis::{BasisSpec, PotentialSpec, QuadratureRule};
pub use operator::{CMatrix, CVector, EigenSystem, HermitianOperator, SpectralWindow};
