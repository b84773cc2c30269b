//! Brute-force validators, independent of the code paths they check.
//!
//! The squeeze oracle exponentiates the squeeze generator densely and
//! compares against the closed-form matrix elements; the evolution oracle
//! integrates the master equation in time and is compared against the
//! direct steady-state solve. Oracles run at small dimensions only and are
//! excluded from performance paths.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{self, FockSpace, ModelParams};
use crate::lindblad::DensityMatrix;
use crate::spectrum;

/// Maximum Hilbert dimension the oracles accept; they are correctness
/// references, not production solvers.
pub const ORACLE_DIM_LIMIT: usize = 300;

/// Outcome of one oracle comparison.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub max_abs_error: f64,
    pub comparison_count: usize,
    pub context: String,
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: max |error| = {:.3e} over {} comparisons",
            self.context, self.max_abs_error, self.comparison_count
        )
    }
}

/// Dense matrix exponential by scaling and squaring with a Taylor series.
/// Adequate for the modest norms of truncated squeeze generators.
pub(crate) fn expm_real(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let norm: f64 = g.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    let k = (norm.log2().ceil().max(0.0) as i32) + 2;
    let scaled = g.map(|x| x / 2f64.powi(k));
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::identity(n, n);
    for j in 1..=40 {
        term = (&term * &scaled).map(|x| x / j as f64);
        acc += &term;
        if term.iter().map(|x| x.abs()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..k {
        acc = &acc * &acc;
    }
    acc
}

/// Dense squeeze operator exp[xi (b^2 - b'^2)/2] on `n_trunc` levels.
pub fn squeeze_operator_dense(xi: f64, n_trunc: usize) -> DMatrix<f64> {
    let mut g = DMatrix::<f64>::zeros(n_trunc, n_trunc);
    for m in 0..n_trunc.saturating_sub(2) {
        // <m| b^2 |m+2> = sqrt((m+1)(m+2)); b'^2 is its transpose
        let v = ((m + 1) as f64 * (m + 2) as f64).sqrt();
        g[(m, m + 2)] += 0.5 * xi * v;
        g[(m + 2, m)] -= 0.5 * xi * v;
    }
    expm_real(&g)
}

/// Compare an arbitrary matrix-element function against the dense
/// exponential on the top-left `n_compare` x `n_compare` block.
pub fn squeeze_oracle_against<F>(
    xi: f64,
    n_compare: usize,
    n_trunc: usize,
    element: F,
) -> Result<OracleReport>
where
    F: Fn(usize, usize) -> Result<f64>,
{
    if n_trunc < 2 * n_compare + 10 {
        return Err(Error::Dimension(format!(
            "squeeze oracle needs n_trunc >= 2*n_compare + 10 (got {n_trunc} vs {})",
            2 * n_compare + 10
        )));
    }
    let dense = squeeze_operator_dense(xi, n_trunc);
    let mut max_abs_error = 0.0f64;
    let mut count = 0usize;
    for m in 0..n_compare {
        for n in 0..n_compare {
            let err = (dense[(m, n)] - element(m, n)?).abs();
            max_abs_error = max_abs_error.max(err);
            count += 1;
        }
    }
    Ok(OracleReport {
        max_abs_error,
        comparison_count: count,
        context: format!("squeeze elements vs matrix exponential (xi = {xi:.6})"),
    })
}

/// Compare the closed-form squeeze matrix elements against the dense
/// exponential oracle.
pub fn squeeze_oracle(xi: f64, n_compare: usize, n_trunc: usize) -> Result<OracleReport> {
    squeeze_oracle_against(xi, n_compare, n_trunc, |m, n| {
        spectrum::squeeze_matrix_element(m, n, xi)
    })
}

/// Trace distance (1/2)||rho_a - rho_b||_1 between two states on the same
/// space.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = a.matrix() - b.matrix();
    let herm = (&diff + diff.adjoint()).map(|v| v * C64::new(0.5, 0.0));
    let eig = herm.symmetric_eigenvalues();
    0.5 * eig.iter().map(|l| l.abs()).sum::<f64>()
}

/// Integrate the master equation from the two-mode vacuum with an adaptive
/// embedded Runge-Kutta pair until `t_final`, returning the final state.
///
/// Step acceptance keeps the per-step trace drift below 1e-10 * dt and
/// checks Hermiticity at every accepted step. Underflowing step sizes raise
/// a stiffness error that points at the direct solver.
pub fn evolve_to_steady(
    params: &ModelParams,
    space: &FockSpace,
    t_final: f64,
    dt_max: f64,
) -> Result<DensityMatrix> {
    params.validate()?;
    params.check_stability(space.n_photon_max())?;
    let d = space.dim();
    if d > ORACLE_DIM_LIMIT {
        return Err(Error::Dimension(format!(
            "evolution oracle limited to D <= {ORACLE_DIM_LIMIT}, got {d}"
        )));
    }
    if !(t_final > 0.0) || !(dt_max > 0.0) {
        return Err(Error::Parameter("t_final and dt_max must be positive".into()));
    }

    let h = hilbert::build_hamiltonian(params, space)?.to_dense();
    let a = hilbert::cavity_annihilator(space)?.to_dense();
    let b = hilbert::membrane_annihilator(space)?.to_dense();
    let a_dag = a.adjoint();
    let b_dag = b.adjoint();
    let num_a = &a_dag * &a;
    let num_b = &b_dag * &b;
    let num_b_rev = &b * &b_dag;

    let gc = params.gamma_c;
    let gm_down = params.gamma_m * (params.n_th + 1.0);
    let gm_up = params.gamma_m * params.n_th;

    let rhs = |rho: &DMatrix<C64>| -> DMatrix<C64> {
        let mut out = (&h * rho - rho * &h).map(|v| v * C64::new(0.0, -1.0));
        // cavity decay
        out += (&a * rho * &a_dag).map(|v| v * C64::new(gc, 0.0));
        out += (&num_a * rho + rho * &num_a).map(|v| v * C64::new(-0.5 * gc, 0.0));
        if gm_down > 0.0 {
            out += (&b * rho * &b_dag).map(|v| v * C64::new(gm_down, 0.0));
            out += (&num_b * rho + rho * &num_b).map(|v| v * C64::new(-0.5 * gm_down, 0.0));
        }
        if gm_up > 0.0 {
            out += (&b_dag * rho * &b).map(|v| v * C64::new(gm_up, 0.0));
            out += (&num_b_rev * rho + rho * &num_b_rev).map(|v| v * C64::new(-0.5 * gm_up, 0.0));
        }
        out
    };

    // Dormand-Prince 5(4) pair
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // embedded 4th-order weights
    const E1: f64 = 5179.0 / 57600.0;
    const E3: f64 = 7571.0 / 16695.0;
    const E4: f64 = 393.0 / 640.0;
    const E5: f64 = -92097.0 / 339200.0;
    const E6: f64 = 187.0 / 2100.0;
    const E7: f64 = 1.0 / 40.0;

    let scale = |m: &DMatrix<C64>, f: f64| m.map(|v| v * C64::new(f, 0.0));

    let mut rho = DMatrix::<C64>::zeros(d, d);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    let mut t = 0.0f64;
    let mut dt = dt_max.min(t_final / 10.0).min(0.1);
    let atol = 1e-11;

    let mut k1 = rhs(&rho);
    while t < t_final {
        if dt < 1e-12 {
            return Err(Error::Stiffness { t });
        }
        dt = dt.min(t_final - t).min(dt_max);
        let k2 = rhs(&(&rho + scale(&k1, A21 * dt)));
        let k3 = rhs(&(&rho + scale(&k1, A31 * dt) + scale(&k2, A32 * dt)));
        let k4 = rhs(&(&rho + scale(&k1, A41 * dt) + scale(&k2, A42 * dt) + scale(&k3, A43 * dt)));
        let k5 = rhs(&(&rho
            + scale(&k1, A51 * dt)
            + scale(&k2, A52 * dt)
            + scale(&k3, A53 * dt)
            + scale(&k4, A54 * dt)));
        let k6 = rhs(&(&rho
            + scale(&k1, A61 * dt)
            + scale(&k2, A62 * dt)
            + scale(&k3, A63 * dt)
            + scale(&k4, A64 * dt)
            + scale(&k5, A65 * dt)));
        let next = &rho
            + scale(&k1, B1 * dt)
            + scale(&k3, B3 * dt)
            + scale(&k4, B4 * dt)
            + scale(&k5, B5 * dt)
            + scale(&k6, B6 * dt);
        let k7 = rhs(&next);
        let lower = &rho
            + scale(&k1, E1 * dt)
            + scale(&k3, E3 * dt)
            + scale(&k4, E4 * dt)
            + scale(&k5, E5 * dt)
            + scale(&k6, E6 * dt)
            + scale(&k7, E7 * dt);
        let err = (&next - &lower).iter().map(|v| v.norm()).fold(0.0, f64::max);

        let trace_drift = (next.trace().re - rho.trace().re).abs() + next.trace().im.abs();
        if err <= atol && trace_drift <= 1e-10 * dt.max(1e-3) {
            // accepted; Hermiticity must be preserved along the way
            let herm_dev = (&next - next.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if herm_dev > 1e-10 {
                return Err(Error::NumericRange(format!(
                    "integration lost Hermiticity ({herm_dev:.3e}) at t = {t:.3e}"
                )));
            }
            t += dt;
            rho = next;
            k1 = k7; // FSAL
            dt *= (atol / err.max(1e-300)).powf(0.2).clamp(0.5, 5.0) * 0.9;
        } else {
            dt *= 0.5;
            // k1 unchanged; retry from the same state
        }
    }

    DensityMatrix::from_matrix(rho, *space)
}
