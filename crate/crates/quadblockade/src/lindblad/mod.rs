//! Master equation of the dissipative cavity-membrane system: Liouvillian
//! assembly, steady-state solve, and photon moments.
//!
//! The density matrix is vectorized column-major, vec(rho)_{i + D j} =
//! rho_{ij}, so A rho B maps to (B^T (x) A) vec(rho). The generator is
//!
//!   L = -i (I (x) H - H^T (x) I) + sum_k D[c_k],
//!   D[c] = conj(c) (x) c - (I (x) c'c + (c'c)^T (x) I) / 2,
//!
//! with jump operators sqrt(gamma_c) a, sqrt(gamma_m (n_th + 1)) b and
//! sqrt(gamma_m n_th) b'. The steady state solves L vec(rho) = 0 with one
//! row replaced by the trace constraint.

mod banded;
mod gmres;

use faer::linalg::solvers::Solve;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{self, FockSpace, ModelParams};
use crate::sparse::ComplexOperator;

use gmres::SectorPreconditioner;

/// Tolerances the solved state must satisfy.
const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = -1e-8;
const BOUNDARY_TOL: f64 = 1e-6;
/// Mean photon numbers below this make g2(0) undefined.
const N_MEAN_TOL: f64 = 1e-12;

/// Vectorized generator of the master equation.
pub struct Liouvillian {
    matrix: ComplexOperator,
    space: FockSpace,
    params: ModelParams,
}

impl Liouvillian {
    pub fn matrix(&self) -> &ComplexOperator {
        &self.matrix
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Dimension D^2 of the vectorized space.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// L applied to a vectorized operator.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matrix.matvec(x, y);
    }

    /// Trace preservation: vec(I)^T L must vanish. Returns the largest
    /// column sum over diagonal-position rows.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.space.dim();
        let mut acc = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            for (col, v) in self.matrix.row(k * (d + 1)) {
                acc[col] += v;
            }
        }
        acc.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Assemble the sparse Liouvillian for the given parameters and truncation.
pub fn build_liouvillian(params: &ModelParams, space: &FockSpace) -> Result<Liouvillian> {
    params.validate()?;
    params.check_stability(space.n_photon_max())?;

    let d = space.dim();
    let id = ComplexOperator::identity(d);
    let h = hilbert::build_hamiltonian(params, space)?;

    // -i (I (x) H - H^T (x) I)
    let mut l = id
        .kron(&h)
        .add(&h.transpose().kron(&id).scale(C64::new(-1.0, 0.0)))
        .scale(C64::new(0.0, -1.0));

    let mut add_dissipator = |c: &ComplexOperator, rate: f64| {
        if rate <= 0.0 {
            return;
        }
        let cdc = c.dagger().matmul(c);
        let jump = c.conj().kron(c).scale(C64::new(rate, 0.0));
        let anti = id
            .kron(&cdc)
            .add(&cdc.transpose().kron(&id))
            .scale(C64::new(-0.5 * rate, 0.0));
        l = l.add(&jump).add(&anti);
    };

    let a_full = hilbert::cavity_annihilator(space)?;
    let b_full = hilbert::membrane_annihilator(space)?;
    add_dissipator(&a_full, params.gamma_c);
    add_dissipator(&b_full, params.gamma_m * (params.n_th + 1.0));
    add_dissipator(&b_full.dagger(), params.gamma_m * params.n_th);

    Ok(Liouvillian { matrix: l, space: *space, params: *params })
}

/// How the stationary solve was performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStateMethod {
    /// Preconditioned GMRES first, sparse LU on failure.
    Auto,
    /// Sparse LU factorization of the trace-replaced system.
    DirectLu,
    /// Preconditioned GMRES only.
    Iterative,
}

/// Post-solve measurements attached to a steady state.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub method: &'static str,
    pub iterations: usize,
    /// max |L vec(rho)| over all rows of the unmodified Liouvillian
    pub residual_inf: f64,
    pub hermiticity_dev: f64,
    pub trace_dev: f64,
    pub min_eigenvalue: f64,
    /// total population of the highest photon / phonon level
    pub boundary_photon: f64,
    pub boundary_phonon: f64,
}

/// Hermitian, unit-trace stationary solution on a [`FockSpace`].
pub struct DensityMatrix {
    rho: DMatrix<C64>,
    space: FockSpace,
    diagnostics: Option<SolveDiagnostics>,
}

impl DensityMatrix {
    /// Wrap an externally produced state (oracles, tests). Checks shape,
    /// Hermiticity and trace at loose tolerances.
    pub fn from_matrix(rho: DMatrix<C64>, space: FockSpace) -> Result<Self> {
        let d = space.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Dimension(format!(
                "density matrix is {}x{}, space needs {d}x{d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let herm = (&rho - rho.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if herm > 1e-6 {
            return Err(Error::Parameter(format!("matrix is not Hermitian (dev {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-6 {
            return Err(Error::Parameter(format!("trace {tr} differs from one")));
        }
        Ok(DensityMatrix { rho, space, diagnostics: None })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn diagnostics(&self) -> Option<&SolveDiagnostics> {
        self.diagnostics.as_ref()
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Population of the s-photon manifold.
    pub fn photon_population(&self, s: usize) -> f64 {
        let nb = self.space.dim_phonon();
        (0..nb).map(|m| self.rho[(self.space.index(s, m), self.space.index(s, m))].re).sum()
    }

    /// Population of phonon level m across all photon sectors.
    pub fn phonon_population(&self, m: usize) -> f64 {
        let na = self.space.dim_photon();
        (0..na).map(|s| self.rho[(self.space.index(s, m), self.space.index(s, m))].re).sum()
    }

    /// <a'a> with its imaginary residue.
    fn photon_moments(&self) -> (C64, C64) {
        let mut n1 = C64::new(0.0, 0.0);
        let mut n2 = C64::new(0.0, 0.0);
        for s in 0..self.space.dim_photon() {
            let mut pop = C64::new(0.0, 0.0);
            for m in 0..self.space.dim_phonon() {
                let k = self.space.index(s, m);
                pop += self.rho[(k, k)];
            }
            n1 += pop * C64::new(s as f64, 0.0);
            n2 += pop * C64::new((s * s.saturating_sub(1)) as f64, 0.0);
        }
        (n1, n2)
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.photon_moments().0.re
    }

    pub fn mean_phonon_number(&self) -> f64 {
        (0..self.space.dim_phonon())
            .map(|m| m as f64 * self.phonon_population(m))
            .sum()
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()).map(|v| v * C64::new(0.5, 0.0));
        herm.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub(crate) fn to_vec(&self) -> Vec<C64> {
        let d = self.space.dim();
        let mut v = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                v.push(self.rho[(i, j)]);
            }
        }
        v
    }

    /// Zero-padded vectorization onto a larger phonon truncation, used to
    /// warm-start refinement solves.
    pub(crate) fn to_vec_padded(&self, target: &FockSpace) -> Option<Vec<C64>> {
        if target.dim_photon() != self.space.dim_photon()
            || target.dim_phonon() < self.space.dim_phonon()
        {
            return None;
        }
        let dt = target.dim();
        let mut v = vec![C64::new(0.0, 0.0); dt * dt];
        for j in 0..self.space.dim() {
            let jt = target.index(self.space.photon_of(j), self.space.phonon_of(j));
            for i in 0..self.space.dim() {
                let it = target.index(self.space.photon_of(i), self.space.phonon_of(i));
                v[it + dt * jt] = self.rho[(i, j)];
            }
        }
        Some(v)
    }
}

/// g2(0) = <a'a'aa> / <a'a>^2 from the diagonal photon populations.
pub fn g2_numeric(rho: &DensityMatrix) -> Result<f64> {
    let (n1, n2) = rho.photon_moments();
    for (value, context) in [(n1, "<a'a>"), (n2, "<a'a'aa>")] {
        if value.im.abs() > 1e-10 {
            return Err(Error::ImaginaryResidue {
                context: context.into(),
                residue: value.im.abs(),
            });
        }
    }
    if n1.re <= N_MEAN_TOL {
        return Err(Error::UndefinedCorrelation { n_mean: n1.re });
    }
    Ok(n2.re / (n1.re * n1.re))
}

/// Solve for the steady state with the default policy (GMRES with sparse-LU
/// fallback, one truncation retry).
pub fn steady_state(liouv: &Liouvillian) -> Result<DensityMatrix> {
    steady_state_with(liouv, SteadyStateMethod::Auto, None)
}

/// Steady-state solve with an explicit method and optional warm start from a
/// previously solved (smaller or equal) truncation.
pub fn steady_state_with(
    liouv: &Liouvillian,
    method: SteadyStateMethod,
    warm: Option<&DensityMatrix>,
) -> Result<DensityMatrix> {
    if liouv.params.gamma_c <= 0.0 {
        return Err(Error::DegenerateSteadyState(
            "gamma_c = 0 leaves the null space multi-dimensional".into(),
        ));
    }
    match solve_validated(liouv, method, warm) {
        Ok(dm) => Ok(dm),
        Err(Error::Truncation(first_msg)) => {
            // one retry with ten extra phonon levels
            let bigger = liouv.space.with_extra_phonons(10);
            log::info!(
                "boundary occupation failed ({first_msg}); retrying at n_phonon_max = {}",
                bigger.n_phonon_max()
            );
            let retry = build_liouvillian(&liouv.params, &bigger)?;
            solve_validated(&retry, method, warm).map_err(|e| match e {
                Error::Truncation(msg) => Error::Truncation(format!(
                    "{msg} (after retry at n_phonon_max = {})",
                    bigger.n_phonon_max()
                )),
                other => other,
            })
        }
        Err(other) => Err(other),
    }
}

fn solve_validated(
    liouv: &Liouvillian,
    method: SteadyStateMethod,
    warm: Option<&DensityMatrix>,
) -> Result<DensityMatrix> {
    let (x, label, iterations) = match method {
        SteadyStateMethod::DirectLu => {
            let x = solve_direct(liouv)?;
            (x, "sparse-lu", 0)
        }
        SteadyStateMethod::Iterative => {
            let out = solve_iterative(liouv, warm)?;
            (out.x, "gmres", out.iterations)
        }
        SteadyStateMethod::Auto => match solve_iterative(liouv, warm) {
            Ok(out) => (out.x, "gmres", out.iterations),
            Err(e) => {
                log::info!("iterative steady-state solve failed ({e}); falling back to sparse LU");
                let x = solve_direct(liouv)?;
                (x, "sparse-lu", 0)
            }
        },
    };
    validate_solution(liouv, x, label, iterations)
}

/// Trace-replaced system matrix: row 0 of L becomes the trace constraint.
fn trace_replaced(liouv: &Liouvillian) -> ComplexOperator {
    let d = liouv.space.dim();
    let trace_row: Vec<(usize, C64)> = (0..d).map(|k| (k * (d + 1), C64::new(1.0, 0.0))).collect();
    liouv.matrix.replace_row(0, &trace_row)
}

fn rhs_unit(d2: usize) -> Vec<C64> {
    let mut b = vec![C64::new(0.0, 0.0); d2];
    b[0] = C64::new(1.0, 0.0);
    b
}

fn solve_iterative(
    liouv: &Liouvillian,
    warm: Option<&DensityMatrix>,
) -> Result<gmres::GmresOutcome> {
    let a = trace_replaced(liouv);
    let precond = SectorPreconditioner::new(&liouv.params, &liouv.space)?;
    let b = rhs_unit(a.dim());
    let x0 = warm.and_then(|w| w.to_vec_padded(&liouv.space));
    gmres::gmres(&a, &precond, &b, x0.as_deref(), 1e-12, 200)
}

fn solve_direct(liouv: &Liouvillian) -> Result<Vec<C64>> {
    let a = trace_replaced(liouv);
    let n = a.dim();
    let triplets: Vec<faer::sparse::Triplet<usize, usize, C64>> = a
        .iter()
        .map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v))
        .collect();
    let mat = faer::sparse::SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::LinearSolve(format!("sparse matrix assembly failed: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::DegenerateSteadyState(format!("sparse LU failed: {e:?}")))?;
    let mut rhs = faer::Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    let x = lu.solve(&rhs);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

fn validate_solution(
    liouv: &Liouvillian,
    x: Vec<C64>,
    method: &'static str,
    iterations: usize,
) -> Result<DensityMatrix> {
    let d = liouv.space.dim();

    // residual of the unmodified generator
    let mut lx = vec![C64::new(0.0, 0.0); d * d];
    liouv.matrix.matvec(&x, &mut lx);
    let residual_inf = lx.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let mut rho = DMatrix::<C64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            rho[(i, j)] = x[i + d * j];
        }
    }
    let hermiticity_dev = (&rho - rho.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tr = rho.trace();
    let trace_dev = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();

    if residual_inf > RESIDUAL_TOL || hermiticity_dev > HERMITICITY_TOL || trace_dev > TRACE_TOL {
        return Err(Error::DegenerateSteadyState(format!(
            "solution rejected: residual {residual_inf:.3e}, hermiticity {hermiticity_dev:.3e}, \
             trace deviation {trace_dev:.3e} (method {method})"
        )));
    }

    let dm = DensityMatrix { rho, space: liouv.space, diagnostics: None };
    let min_eigenvalue = dm.min_eigenvalue();
    if min_eigenvalue < POSITIVITY_TOL {
        return Err(Error::Truncation(format!(
            "minimum eigenvalue {min_eigenvalue:.3e} below tolerance"
        )));
    }

    let boundary_photon = dm.photon_population(liouv.space.n_photon_max());
    let boundary_phonon = dm.phonon_population(liouv.space.n_phonon_max());
    if boundary_phonon > BOUNDARY_TOL {
        return Err(Error::Truncation(format!(
            "highest phonon level holds {boundary_phonon:.3e} population"
        )));
    }
    if boundary_photon > BOUNDARY_TOL {
        return Err(Error::Truncation(format!(
            "highest photon level holds {boundary_photon:.3e} population; \
             raise n_photon_max"
        )));
    }

    Ok(DensityMatrix {
        diagnostics: Some(SolveDiagnostics {
            method,
            iterations,
            residual_inf,
            hermiticity_dev,
            trace_dev,
            min_eigenvalue,
            boundary_photon,
            boundary_phonon,
        }),
        ..dm
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coherent_params() -> ModelParams {
        ModelParams {
            delta_c: 0.0,
            g0: 0.0,
            omega_drive: 0.01,
            gamma_c: 0.1,
            gamma_m: 0.01,
            n_th: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn liouvillian_preserves_trace() {
        let params = ModelParams {
            delta_c: -0.4,
            g0: 0.8,
            omega_drive: 0.01,
            gamma_c: 0.1,
            gamma_m: 0.001,
            n_th: 0.3,
            ..Default::default()
        };
        let space = FockSpace::new(3, 6).unwrap();
        let liouv = build_liouvillian(&params, &space).unwrap();
        assert!(liouv.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn vacuum_is_dark_without_drive() {
        let params = ModelParams {
            delta_c: 0.3,
            g0: 0.4,
            omega_drive: 0.0,
            gamma_c: 0.2,
            gamma_m: 0.0,
            n_th: 0.0,
            ..Default::default()
        };
        let space = FockSpace::new(3, 5).unwrap();
        let liouv = build_liouvillian(&params, &space).unwrap();
        let d = space.dim();
        let mut vac = vec![C64::new(0.0, 0.0); d * d];
        vac[0] = C64::new(1.0, 0.0);
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        liouv.apply(&vac, &mut out);
        let max = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max < 1e-14, "vacuum not stationary: {max:.2e}");
    }

    #[test]
    fn closed_system_generator_is_anti_hermitian() {
        // gamma_c = gamma_m = 0: pure commutator, L' = -L in the
        // Hilbert-Schmidt sense. Checked entrywise on the sparse matrix.
        let params = ModelParams {
            delta_c: -0.2,
            g0: 0.3,
            omega_drive: 0.05,
            gamma_c: 0.0,
            gamma_m: 0.0,
            n_th: 0.0,
            ..Default::default()
        };
        let space = FockSpace::new(2, 4).unwrap();
        let liouv = build_liouvillian(&params, &space).unwrap();
        let dev = liouv
            .matrix()
            .add(&liouv.matrix().dagger())
            .max_abs();
        assert!(dev < 1e-13, "anti-Hermiticity dev {dev:.2e}");
    }

    #[test]
    fn hermitian_structure_is_preserved() {
        // L maps vectorized Hermitian matrices to vectorized Hermitian
        // matrices: check on a random Hermitian input.
        let params = ModelParams {
            delta_c: 0.1,
            g0: 0.5,
            omega_drive: 0.02,
            gamma_c: 0.15,
            gamma_m: 0.002,
            n_th: 0.7,
            ..Default::default()
        };
        let space = FockSpace::new(2, 4).unwrap();
        let d = space.dim();
        let liouv = build_liouvillian(&params, &space).unwrap();
        let mut herm = DMatrix::<C64>::zeros(d, d);
        let mut seed = 1u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..d {
            for j in i..d {
                let v = C64::new(next(), if i == j { 0.0 } else { next() });
                herm[(i, j)] = v;
                herm[(j, i)] = v.conj();
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            for i in 0..d {
                x[i + d * j] = herm[(i, j)];
            }
        }
        let mut y = vec![C64::new(0.0, 0.0); d * d];
        liouv.apply(&x, &mut y);
        let mut dev = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                dev = dev.max((y[i + d * j] - y[j + d * i].conj()).norm());
            }
        }
        assert!(dev < 1e-12, "Hermitian structure broken by {dev:.2e}");
    }

    #[test]
    fn coherent_limit_matches_linear_cavity() {
        // g0 = 0, Delta_c = 0: the cavity settles into a coherent state with
        // |alpha|^2 = Omega^2 / (gamma_c^2/4) and Poissonian statistics.
        let params = coherent_params();
        let space = FockSpace::new(5, 3).unwrap();
        let liouv = build_liouvillian(&params, &space).unwrap();
        let rho = steady_state(&liouv).unwrap();
        let n_expect = params.omega_drive.powi(2) / (params.gamma_c.powi(2) / 4.0);
        assert_abs_diff_eq!(rho.mean_photon_number(), n_expect, epsilon = 1e-6);
        assert_abs_diff_eq!(g2_numeric(&rho).unwrap(), 1.0, epsilon = 1e-4);
        assert!(rho.purity() <= 1.0 + 1e-10);
    }

    #[test]
    fn direct_and_iterative_solvers_agree() {
        let params = ModelParams {
            delta_c: -0.5247,
            g0: 0.8,
            omega_drive: 0.01,
            gamma_c: 0.1,
            gamma_m: 0.001,
            n_th: 0.0,
            ..Default::default()
        };
        let space = FockSpace::new(4, 14).unwrap();
        let liouv = build_liouvillian(&params, &space).unwrap();
        let lu = steady_state_with(&liouv, SteadyStateMethod::DirectLu, None).unwrap();
        let it = steady_state_with(&liouv, SteadyStateMethod::Iterative, None).unwrap();
        let dev = (lu.matrix() - it.matrix()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-9, "solver disagreement {dev:.2e}");
        assert_abs_diff_eq!(
            g2_numeric(&lu).unwrap(),
            g2_numeric(&it).unwrap(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn undriven_thermal_membrane() {
        // Omega = 0, n_th = 0.5: photon vacuum times a thermal phonon state.
        let params = ModelParams {
            delta_c: 0.2,
            g0: 0.0,
            omega_drive: 0.0,
            gamma_c: 0.1,
            gamma_m: 0.05,
            n_th: 0.5,
            ..Default::default()
        };
        let space = FockSpace::new(2, 24).unwrap();
        let liouv = build_liouvillian(&params, &space).unwrap();
        let rho = steady_state(&liouv).unwrap();
        assert_abs_diff_eq!(rho.mean_phonon_number(), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(rho.photon_population(0), 1.0, epsilon = 1e-10);
        // factorized vacuum (x) thermal, checked entrywise
        let nb = space.dim_phonon();
        let mut dev = 0.0f64;
        for m in 0..nb {
            for n in 0..nb {
                let expect = if m == n {
                    let p = 1.0 / 1.5 * (0.5f64 / 1.5).powi(m as i32);
                    C64::new(p, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                let k = space.index(0, m);
                let l = space.index(0, n);
                dev = dev.max((rho.matrix()[(k, l)] - expect).norm());
            }
        }
        assert!(dev < 1e-8, "thermal factorization dev {dev:.2e}");
    }

    #[test]
    fn fock_state_g2_values() {
        let space = FockSpace::new(3, 1).unwrap();
        let d = space.dim();
        // |1><1|_a (x) |0><0|_b
        let mut one = DMatrix::<C64>::zeros(d, d);
        one[(space.index(1, 0), space.index(1, 0))] = C64::new(1.0, 0.0);
        let dm = DensityMatrix::from_matrix(one, space).unwrap();
        assert_eq!(g2_numeric(&dm).unwrap(), 0.0);
        // |2><2|_a: <a'a'aa> = 2, <a'a> = 2 => g2 = 0.5
        let mut two = DMatrix::<C64>::zeros(d, d);
        two[(space.index(2, 1), space.index(2, 1))] = C64::new(1.0, 0.0);
        let dm = DensityMatrix::from_matrix(two, space).unwrap();
        assert_abs_diff_eq!(g2_numeric(&dm).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn g2_undefined_for_vacuum() {
        let space = FockSpace::new(2, 1).unwrap();
        let d = space.dim();
        let mut vac = DMatrix::<C64>::zeros(d, d);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let dm = DensityMatrix::from_matrix(vac, space).unwrap();
        assert!(matches!(
            g2_numeric(&dm),
            Err(Error::UndefinedCorrelation { .. })
        ));
    }

    #[test]
    fn zero_cavity_decay_is_degenerate() {
        let params = ModelParams {
            gamma_c: 0.0,
            omega_drive: 0.01,
            gamma_m: 0.01,
            ..Default::default()
        };
        let space = FockSpace::new(2, 3).unwrap();
        let liouv = build_liouvillian(&params, &space).unwrap();
        assert!(matches!(
            steady_state(&liouv),
            Err(Error::DegenerateSteadyState(_))
        ));
    }
}
