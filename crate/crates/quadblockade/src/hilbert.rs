//! Truncated two-mode Fock space and the system Hamiltonian.
//!
//! The cavity mode (photons, index `s`) and the membrane mode (phonons,
//! index `m`) live on a tensor-product space with the composite basis index
//! `k = s * N_b + m` (photon-major), so photon-number blocks are contiguous.
//! All quantities are expressed in units of the mechanical frequency
//! (`omega_m = 1` by default).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::ComplexOperator;

/// Truncation of the two-mode Fock space.
///
/// `n_photon_max` is the highest retained cavity Fock state (dimension
/// `N_a = n_photon_max + 1`), `n_phonon_max` the highest phonon state
/// (dimension `N_b = n_phonon_max + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_photon_max: usize,
    n_phonon_max: usize,
}

impl FockSpace {
    /// Two-photon amplitudes must be representable, so `n_photon_max >= 2`;
    /// the phonon side needs at least two levels.
    pub fn new(n_photon_max: usize, n_phonon_max: usize) -> Result<Self> {
        if n_photon_max < 2 {
            return Err(Error::Dimension(format!(
                "n_photon_max = {n_photon_max} < 2; g2(0) needs the two-photon sector"
            )));
        }
        if n_phonon_max < 1 {
            return Err(Error::Dimension(format!(
                "n_phonon_max = {n_phonon_max} < 1; need at least two phonon levels"
            )));
        }
        Ok(FockSpace { n_photon_max, n_phonon_max })
    }

    pub fn n_photon_max(&self) -> usize {
        self.n_photon_max
    }

    pub fn n_phonon_max(&self) -> usize {
        self.n_phonon_max
    }

    /// Cavity dimension N_a.
    pub fn dim_photon(&self) -> usize {
        self.n_photon_max + 1
    }

    /// Membrane dimension N_b.
    pub fn dim_phonon(&self) -> usize {
        self.n_phonon_max + 1
    }

    /// Total dimension D = N_a * N_b.
    pub fn dim(&self) -> usize {
        self.dim_photon() * self.dim_phonon()
    }

    /// Composite index of |s>_a |m>_b.
    pub fn index(&self, s: usize, m: usize) -> usize {
        debug_assert!(s < self.dim_photon() && m < self.dim_phonon());
        s * self.dim_phonon() + m
    }

    /// Photon number of a composite index.
    pub fn photon_of(&self, k: usize) -> usize {
        k / self.dim_phonon()
    }

    /// Phonon number of a composite index.
    pub fn phonon_of(&self, k: usize) -> usize {
        k % self.dim_phonon()
    }

    /// Same photon truncation with `extra` additional phonon levels.
    pub fn with_extra_phonons(&self, extra: usize) -> FockSpace {
        FockSpace {
            n_photon_max: self.n_photon_max,
            n_phonon_max: self.n_phonon_max + extra,
        }
    }
}

/// Physical parameters of the driven, quadratically coupled cavity, in units
/// of the mechanical frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Driving detuning Delta_c = omega_c - omega_L.
    pub delta_c: f64,
    /// Mechanical frequency (the unit scale; keep at 1 unless you know why).
    pub omega_m: f64,
    /// Quadratic optomechanical coupling strength g0.
    pub g0: f64,
    /// Driving magnitude Omega.
    pub omega_drive: f64,
    /// Cavity field decay rate gamma_c.
    pub gamma_c: f64,
    /// Mechanical decay rate gamma_m.
    pub gamma_m: f64,
    /// Thermal phonon occupation of the mechanical bath.
    pub n_th: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            delta_c: 0.0,
            omega_m: 1.0,
            g0: 0.0,
            omega_drive: 0.0,
            gamma_c: 0.1,
            gamma_m: 0.0,
            n_th: 0.0,
        }
    }
}

impl ModelParams {
    /// Rate and frequency sanity checks (no Fock space needed).
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0) {
            return Err(Error::Parameter(format!("omega_m = {} must be positive", self.omega_m)));
        }
        for (name, v) in [
            ("gamma_c", self.gamma_c),
            ("gamma_m", self.gamma_m),
            ("n_th", self.n_th),
            ("omega_drive", self.omega_drive),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Parameter(format!("{name} = {v} must be nonnegative")));
            }
        }
        if !self.delta_c.is_finite() || !self.g0.is_finite() {
            return Err(Error::Parameter("delta_c and g0 must be finite".into()));
        }
        Ok(())
    }

    /// Membrane stability: omega_m + 4*s*g0 > 0 for every retained photon
    /// number s. Returns the offending s on violation.
    pub fn check_stability(&self, n_photon_max: usize) -> Result<()> {
        for s in 0..=n_photon_max {
            let value = self.omega_m + 4.0 * s as f64 * self.g0;
            if value <= 0.0 {
                return Err(Error::Stability { photon_number: s, value });
            }
        }
        Ok(())
    }
}

/// Truncated annihilation operator: <n-1| a |n> = sqrt(n).
pub fn annihilator(n_levels: usize) -> Result<ComplexOperator> {
    if n_levels < 2 {
        return Err(Error::Dimension(format!(
            "annihilator needs at least 2 levels, got {n_levels}"
        )));
    }
    let triplets: Vec<(usize, usize, C64)> = (1..n_levels)
        .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
        .collect();
    Ok(ComplexOperator::from_triplets(n_levels, n_levels, &triplets))
}

/// Kronecker product with the cavity factor on the slow index.
pub fn tensor(op_a: &ComplexOperator, op_b: &ComplexOperator) -> ComplexOperator {
    assert_eq!(op_a.nrows(), op_a.ncols(), "tensor expects square factors");
    assert_eq!(op_b.nrows(), op_b.ncols(), "tensor expects square factors");
    op_a.kron(op_b)
}

/// Cavity annihilator lifted to the full space, a (x) I_b.
pub fn cavity_annihilator(space: &FockSpace) -> Result<ComplexOperator> {
    Ok(tensor(
        &annihilator(space.dim_photon())?,
        &ComplexOperator::identity(space.dim_phonon()),
    ))
}

/// Membrane annihilator lifted to the full space, I_a (x) b.
pub fn membrane_annihilator(space: &FockSpace) -> Result<ComplexOperator> {
    Ok(tensor(
        &ComplexOperator::identity(space.dim_photon()),
        &annihilator(space.dim_phonon())?,
    ))
}

/// Phonon-sector Hamiltonian for fixed photon number s:
/// omega_m * b'b + g0 * s * (b' + b)^2, as a real symmetric matrix.
///
/// This is the block of the full Hamiltonian acting inside the s-photon
/// manifold (minus the constant s*delta_c).
pub fn phonon_block(params: &ModelParams, s: usize, n_levels: usize) -> nalgebra::DMatrix<f64> {
    let mut h = nalgebra::DMatrix::<f64>::zeros(n_levels, n_levels);
    let gs = params.g0 * s as f64;
    for m in 0..n_levels {
        // (b'+b)^2 diagonal: 2m+1
        h[(m, m)] = params.omega_m * m as f64 + gs * (2.0 * m as f64 + 1.0);
        if m + 2 < n_levels {
            // b'b' + bb part: sqrt((m+1)(m+2)) on |m><m+2| and h.c.
            let amp = gs * ((m + 1) as f64 * (m + 2) as f64).sqrt();
            h[(m, m + 2)] = amp;
            h[(m + 2, m)] = amp;
        }
    }
    h
}

/// Full system Hamiltonian
/// H = Delta_c a'a + omega_m b'b + g0 a'a (b'+b)^2 + Omega (a'+a).
pub fn build_hamiltonian(params: &ModelParams, space: &FockSpace) -> Result<ComplexOperator> {
    params.validate()?;
    params.check_stability(space.n_photon_max())?;

    let na = space.dim_photon();
    let nb = space.dim_phonon();
    let a = annihilator(na)?;
    let b = annihilator(nb)?;
    let num_a = a.dagger().matmul(&a);
    let num_b = b.dagger().matmul(&b);
    let x_b = b.dagger().add(&b); // b' + b
    let x_b_sq = x_b.matmul(&x_b);
    let drive_a = a.dagger().add(&a);

    let id_a = ComplexOperator::identity(na);
    let id_b = ComplexOperator::identity(nb);

    let mut h = tensor(&num_a, &id_b).scale(C64::new(params.delta_c, 0.0));
    h = h.add(&tensor(&id_a, &num_b).scale(C64::new(params.omega_m, 0.0)));
    h = h.add(&tensor(&num_a, &x_b_sq).scale(C64::new(params.g0, 0.0)));
    h = h.add(&tensor(&drive_a, &id_b).scale(C64::new(params.omega_drive, 0.0)));
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn annihilator_two_levels() {
        let a = annihilator(2).unwrap();
        assert_eq!(a.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(a.get(0, 0), C64::new(0.0, 0.0));
        assert_eq!(a.get(1, 0), C64::new(0.0, 0.0));
        assert_eq!(a.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn annihilator_kills_vacuum_and_ladders() {
        let a = annihilator(5).unwrap();
        // a|0> = 0: column 0 empty
        for r in 0..5 {
            assert_eq!(a.get(r, 0), C64::new(0.0, 0.0));
        }
        // <1| a |2> = sqrt(2)
        assert_abs_diff_eq!(a.get(1, 2).re, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn annihilator_rejects_single_level() {
        assert!(matches!(annihilator(1), Err(Error::Dimension(_))));
    }

    #[test]
    fn truncated_ladder_identity() {
        let n = 6;
        let a = annihilator(n).unwrap();
        let num = a.dagger().matmul(&a);
        for k in 0..n {
            assert_abs_diff_eq!(num.get(k, k).re, k as f64, epsilon = 1e-14);
        }
        // [a, a'] = I except the last diagonal entry, which is -n_max
        let comm = a.matmul(&a.dagger()).add(&num.scale(C64::new(-1.0, 0.0)));
        for r in 0..n {
            for c in 0..n {
                let expect = if r == c {
                    if r == n - 1 {
                        -((n - 1) as f64)
                    } else {
                        1.0
                    }
                } else {
                    0.0
                };
                assert_abs_diff_eq!(comm.get(r, c).re, expect, epsilon = 1e-13);
                assert_abs_diff_eq!(comm.get(r, c).im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn tensor_against_dense_oracle() {
        // (A (x) I)(I (x) B) = A (x) B, checked entrywise against a dense
        // Kronecker product computed by the index formula.
        let a = ComplexOperator::from_triplets(
            3,
            3,
            &[
                (0, 0, C64::new(0.3, -0.1)),
                (0, 2, C64::new(1.0, 0.5)),
                (1, 1, C64::new(-0.7, 0.0)),
                (2, 0, C64::new(0.2, 0.9)),
            ],
        );
        let b = ComplexOperator::from_triplets(
            3,
            3,
            &[
                (0, 1, C64::new(0.4, 0.0)),
                (1, 0, C64::new(0.0, 1.0)),
                (2, 2, C64::new(-0.5, 0.25)),
                (1, 2, C64::new(0.8, -0.3)),
            ],
        );
        let id = ComplexOperator::identity(3);
        let lhs = tensor(&a, &id).matmul(&tensor(&id, &b));
        let rhs = tensor(&a, &b);
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);

        let ad = a.to_dense();
        let bd = b.to_dense();
        let kd = rhs.to_dense();
        for i1 in 0..3 {
            for i2 in 0..3 {
                for j1 in 0..3 {
                    for j2 in 0..3 {
                        let expect = ad[(i1, j1)] * bd[(i2, j2)];
                        assert!((kd[(3 * i1 + i2, 3 * j1 + j2)] - expect).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn hamiltonian_decoupled_is_diagonal() {
        let params = ModelParams { delta_c: -0.3, ..Default::default() };
        let space = FockSpace::new(3, 4).unwrap();
        let h = build_hamiltonian(&params, &space).unwrap();
        for (r, c, v) in h.iter() {
            if r != c {
                assert!(v.norm() < 1e-15, "off-diagonal entry at ({r},{c})");
            }
        }
        for s in 0..space.dim_photon() {
            for m in 0..space.dim_phonon() {
                let k = space.index(s, m);
                let expect = s as f64 * params.delta_c + m as f64 * params.omega_m;
                assert_abs_diff_eq!(h.get(k, k).re, expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let params = ModelParams {
            delta_c: -0.52,
            g0: 0.8,
            omega_drive: 0.01,
            ..Default::default()
        };
        let space = FockSpace::new(4, 12).unwrap();
        let h = build_hamiltonian(&params, &space).unwrap();
        assert!(h.max_abs_diff(&h.dagger()) < 1e-14);
    }

    #[test]
    fn hamiltonian_linear_in_drive() {
        let space = FockSpace::new(3, 6).unwrap();
        let base = ModelParams { delta_c: 0.4, g0: 0.25, ..Default::default() };
        let p1 = ModelParams { omega_drive: 0.02, ..base };
        let p2 = ModelParams { omega_drive: 0.04, ..base };
        let h1 = build_hamiltonian(&p1, &space).unwrap();
        let h2 = build_hamiltonian(&p2, &space).unwrap();
        let diff = h2.add(&h1.scale(C64::new(-1.0, 0.0)));
        let a_full = cavity_annihilator(&space).unwrap();
        let drive = a_full.dagger().add(&a_full).scale(C64::new(0.02, 0.0));
        assert!(diff.max_abs_diff(&drive) < 1e-15);
    }

    #[test]
    fn displacement_squared_matches_sum_form_in_interior() {
        // (b'+b)^2 by squaring vs b'b' + bb + 2b'b + I, away from the
        // truncation row/column.
        let nb = 8;
        let b = annihilator(nb).unwrap();
        let x = b.dagger().add(&b);
        let x_sq = x.matmul(&x);
        let sum_form = b
            .dagger()
            .matmul(&b.dagger())
            .add(&b.matmul(&b))
            .add(&b.dagger().matmul(&b).scale(C64::new(2.0, 0.0)))
            .add(&ComplexOperator::identity(nb));
        for r in 0..nb - 1 {
            for c in 0..nb - 1 {
                assert!(
                    (x_sq.get(r, c) - sum_form.get(r, c)).norm() < 1e-13,
                    "interior mismatch at ({r},{c})"
                );
            }
        }
    }

    #[test]
    fn photon_number_conserved_without_drive() {
        let params = ModelParams { delta_c: -0.8, g0: 0.8, ..Default::default() };
        let space = FockSpace::new(4, 10).unwrap();
        let h = build_hamiltonian(&params, &space).unwrap();
        let a_full = cavity_annihilator(&space).unwrap();
        let num = a_full.dagger().matmul(&a_full);
        let comm = h.matmul(&num).add(&num.matmul(&h).scale(C64::new(-1.0, 0.0)));
        assert!(comm.max_abs() < 1e-12);
    }

    #[test]
    fn stability_guard_names_offending_photon_number() {
        let params = ModelParams { g0: -0.3, ..Default::default() };
        let space = FockSpace::new(4, 4).unwrap();
        // omega_m + 4*s*g0 <= 0 first at s = 1 (1 - 1.2 < 0)
        match build_hamiltonian(&params, &space) {
            Err(Error::Stability { photon_number, .. }) => assert_eq!(photon_number, 1),
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn one_photon_block_ground_energy_matches_dressed_shift() {
        // Delta_c = 0, Omega = 0, g0 = 0.8: the lowest eigenvalue of the
        // s = 1 phonon block converges to (sqrt(4.2) - 1)/2.
        let params = ModelParams { g0: 0.8, ..Default::default() };
        let block = phonon_block(&params, 1, 120);
        let eig = nalgebra::SymmetricEigen::new(block);
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let expect = ((1.0f64 + 4.0 * 0.8).sqrt() - 1.0) / 2.0;
        assert_abs_diff_eq!(min, expect, epsilon = 1e-9);
    }
}
