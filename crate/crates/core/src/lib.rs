//! Slow-fast analysis of a beam on a nonlinear elastic foundation driven by a
//! traveling-wave base excitation.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: closed-form coefficients of the single-mode oscillator, in
//!   time and in the slow variable `d = cos(omega t)`.
//! - [`cubic`]: real roots of the equilibrium cubic.
//! - [`equilibria`]: classification and the critical manifold.
//! - [`ode`] and [`simulation`]: Dormand-Prince integration of the forced
//!   oscillator and burst classification.
//! - [`continuation`]: pseudo-arclength continuation of equilibria and fold
//!   curves, cusp and Bogdanov-Takens detection, and a grid-scan oracle.
//! - [`galerkin`]: quadrature re-derivation of the reduced coefficients.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod cubic;
pub mod equilibria;
pub mod error;
pub mod galerkin;
pub mod model;
pub mod ode;
pub mod simulation;

pub use error::{Error, Result};
pub use model::{
    BeamFoundationParams, Forcing, QuadraticForm, SineBranch, SlowFastCoefficients, SlowPhase,
};
