//! Exact Gaussian-rational arithmetic, multivariate polynomials, and small
//! dense linear algebra over ℂ and ℝ.
//!
//! # Realification convention
//!
//! A complex `n`-space is viewed as a real `2n`-space by the *interleaved*
//! convention `(re₁, im₁, re₂, im₂, …, re_n, im_n)`, fixed once here and
//! used by every module in the crate. A complex matrix realifies to 2×2
//! blocks `[[a, −b], [b, a]]` per entry `a + bi`.
//!
//! Exact mode never rounds; floating mode carries an explicit tolerance
//! and every floating verdict records its margin (smallest eigenvalue or
//! pivot magnitude that witnessed the decision).

mod matrix;
mod poly;
mod real;
mod scalar;

pub use matrix::{ComplexMatrix, MatrixMode};
pub use poly::{CompiledPoly, Interval, Polynomial};
pub use real::{
    re_q_gram, real_definiteness, real_definiteness_exact, real_definiteness_f64, realify_matrix,
    realify_vector, unrealify_vector, Definiteness, DefinitenessReport, RealMatrix, RealSubspace,
};
pub use scalar::{parse_rat as parse_rat_str, GaussianRational, Rat, C64};

use thiserror::Error;

/// Errors from the exact/floating linear-algebra kernels.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("arity mismatch: expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unknown variable index {index} (polynomial has {nvars} variables)")]
    UnknownVariable { index: usize, nvars: usize },
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular matrix")]
    Singular,
    #[error("cannot parse rational number from {0:?}")]
    ParseRational(String),
    #[error("degenerate pivot: |pivot| = {pivot:.3e} <= tolerance {tolerance:.3e}")]
    DegeneratePivot { pivot: f64, tolerance: f64 },
    #[error("basis vectors are not linearly independent at the active tolerance")]
    DependentBasis,
}
