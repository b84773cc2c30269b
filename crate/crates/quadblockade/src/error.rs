//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by operator construction, the analytic solver, and the
/// steady-state machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or truncation arguments outside the supported range.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Invalid physical parameters (negative rates, bad axis values, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Membrane stability condition violated: omega_m + 4*s*g0 must stay
    /// positive for every retained photon number s.
    #[error(
        "stability violation at photon number s={photon_number}: \
         omega_m + 4*s*g0 = {value:.6e} <= 0"
    )]
    Stability { photon_number: usize, value: f64 },

    /// A stabilized sum overflowed or lost all significance.
    #[error("numeric range error: {0}")]
    NumericRange(String),

    /// Truncation refinement did not settle. Carries the last two partial
    /// values of the quantity being converged.
    #[error("convergence failure: {context} (last two values {prev:.9e}, {last:.9e})")]
    Convergence { context: String, prev: f64, last: f64 },

    /// The trace-replaced steady-state system is singular (e.g. gamma_c = 0,
    /// or an undriven, undamped subsystem leaves multiple stationary states).
    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),

    /// A solved density matrix failed its invariants even after the
    /// truncation retry.
    #[error("truncation failure: {0}")]
    Truncation(String),

    /// g2(0) is undefined because the mean photon number vanishes.
    #[error("undefined correlation: mean photon number {n_mean:.3e} below tolerance")]
    UndefinedCorrelation { n_mean: f64 },

    /// A trace that must be real carries a non-negligible imaginary part.
    #[error("imaginary residue {residue:.3e} in {context}")]
    ImaginaryResidue { context: String, residue: f64 },

    /// Adaptive integration collapsed its step size (stiff system).
    #[error("stiffness error: step size underflow at t={t:.6e}; use the direct steady-state solver")]
    Stiffness { t: f64 },

    /// Sparse LU factorization failed.
    #[error("linear solve failure: {0}")]
    LinearSolve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
