//! Steady-state photon statistics of a weakly driven, quadratically coupled
//! optomechanical cavity.
//!
//! The crate computes the equal-time second-order correlation function
//! g2(0) of the cavity field by two independent routes and cross-validates
//! them against brute-force oracles:
//!
//! * [`perturbation`] — an analytic few-photon solver built on the closed-form
//!   eigenstructure of the undriven system ([`spectrum`]): squeezed phonon
//!   manifolds, long-time amplitudes, and small-coupling limits.
//! * [`lindblad`] — the full master equation with optical and mechanical
//!   dissipation, vectorized into a sparse Liouvillian and solved for its
//!   stationary state.
//! * [`oracles`] — independent validators: squeeze matrix elements from a
//!   dense matrix exponential, and time-domain integration of the master
//!   equation.
//! * [`sweep`] — a parallel parameter-scan engine with per-point truncation
//!   control, used to reproduce the published parameter regimes.
//!
//! Everything is expressed in units of the mechanical frequency.

pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod perturbation;
pub mod sweep;
pub mod oracles;
pub mod sparse;
pub mod spectrum;

pub use error::{Error, Result};
pub use hilbert::{FockSpace, ModelParams};
pub use lindblad::DensityMatrix;
pub use sparse::ComplexOperator;
