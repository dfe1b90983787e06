#![allow(clippy::needless_range_loop)] // index-matched tensor loops read better here

//! Exact verification toolkit for three integrable systems on the sphere.
//!
//! The crate builds the Jacobi-Moser, Neumann-Uhlenbeck and dual Moser
//! first-integral families on `T*R^{n+1}`, proves their classical involution
//! and Stackel structure in ellipsoidal coordinates, computes curvature of
//! the separating metrics, quantizes the integrals (minimal/Carter and
//! conformally equivariant prescriptions) and certifies quantum
//! integrability by exact commutator evaluation. Everything algebraic runs
//! over arbitrary-precision rationals; the only floating point lives in the
//! geodesic-flow simulator.
//!
//! Module map:
//! - [`scalar`], [`jet`], [`poly`], [`sample`]: exact arithmetic kernels
//!   (rationals, Gaussian rationals, truncated Taylor jets, phase-space
//!   polynomials, deterministic rational sampling).
//! - [`systems`]: the ambient first-integral families and their bracket
//!   identities.
//! - [`ellipsoidal`]: Jacobi ellipsoidal coordinates, Stackel matrices,
//!   separated integrals and pullback consistency.
//! - [`curvature`]: exact curvature of diagonal metrics via jets, Robertson
//!   condition, conformal-flatness certificates.
//! - [`quantization`]: differential operators on jets, the two quantization
//!   prescriptions, exact commutators and the per-system verdict table.
//! - [`flow`]: adaptive Runge-Kutta geodesic integration with conservation
//!   monitoring and the projective-equivalence demonstration.
//! - [`report`]: verdict records shared by all verification entry points.

pub mod curvature;
pub mod ellipsoidal;
pub mod flow;
pub mod jet;
pub mod poly;
pub mod quantization;
pub mod report;
pub mod sample;
pub mod scalar;
pub mod systems;

pub use report::{CheckRecord, Verdict, VerificationReport};
pub use scalar::{GaussianRational, Rat};
pub use systems::{SemiAxes, SystemKind};

/// Errors shared by the exact-arithmetic modules.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("coincident semi-axes at positions {0} and {1}")]
    CoincidentSemiAxes(usize, usize),
    #[error("semi-axes must be positive and strictly increasing")]
    InvalidSemiAxes,
    #[error("pole at base point")]
    PoleAtBase,
    #[error("not in coordinate chart: {0}")]
    ChartViolation(String),
    #[error("identity not applicable: {0}")]
    NotApplicable(String),
    #[error("conformal quantization coefficients undefined for n = {0}")]
    CoefficientsUndefined(usize),
    #[error("conformal test undefined for n = {0}")]
    ConformalTestUndefined(usize),
    #[error("jet order {0} exceeds the supported maximum {1}")]
    OrderOverflow(usize, usize),
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error("invalid rational literal: {0}")]
    BadRational(String),
    #[error("dimension must satisfy {0}")]
    BadDimension(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
