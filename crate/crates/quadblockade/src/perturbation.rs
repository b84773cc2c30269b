//! Analytic few-photon solver in the weak-driving regime.
//!
//! With the drive treated as a perturbation on top of the non-Hermitian
//! effective Hamiltonian H - i(gamma_c/2) a'a, the long-time one- and
//! two-photon amplitudes (membrane initially in its ground state) are
//!
//!   C_{1,m} = -Omega <m~(1)|0> / (E_{1,m} - i gamma_c/2),
//!   C_{2,m} = sqrt(2) Omega^2 sum_n <m~(2)|n~(1)> <n~(1)|0>
//!             / [(E_{2,m} - i gamma_c)(E_{1,n} - i gamma_c/2)],
//!
//! and g2(0) = 2 P_2 / (P_1 + 2 P_2)^2 with P_s = sum_m |C_{s,m}|^2. The
//! stationary phase e^{-i E_{0,0} t} has unit modulus and is dropped, so the
//! probabilities are time-independent.
//!
//! Mechanical dissipation never enters here; the numeric master-equation
//! solver owns finite gamma_m and thermal occupation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::ModelParams;
use crate::spectrum::{dressed_level, squeeze_matrix_element};

/// Phonon truncation used by default when no explicit value is requested.
pub const DEFAULT_N_PHONON: usize = 24;

/// Relative g2 change between truncation doublings considered converged.
const CONVERGENCE_RTOL: f64 = 1e-8;

/// Long-time probability amplitudes of the zero-, one- and two-photon
/// manifolds, membrane initially in its ground state.
#[derive(Debug, Clone)]
pub struct AmplitudeSet {
    /// |C_{0,m}|: ground-state initial condition, only m = 0 occupied.
    c0: Vec<f64>,
    c1: Vec<C64>,
    c2: Vec<C64>,
    n_phonon_max: usize,
}

impl AmplitudeSet {
    pub fn c0(&self) -> &[f64] {
        &self.c0
    }

    pub fn c1(&self) -> &[C64] {
        &self.c1
    }

    pub fn c2(&self) -> &[C64] {
        &self.c2
    }

    pub fn n_phonon_max(&self) -> usize {
        self.n_phonon_max
    }

    /// Single-photon probability P_1.
    pub fn p1(&self) -> f64 {
        self.c1.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Two-photon probability P_2.
    pub fn p2(&self) -> f64 {
        self.c2.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Amplitudes at a fixed phonon truncation (no refinement).
pub fn longtime_amplitudes_fixed(params: &ModelParams, n_phonon_max: usize) -> Result<AmplitudeSet> {
    params.validate()?;
    params.check_stability(2)?;
    if params.gamma_c <= 0.0 {
        return Err(Error::Parameter(
            "the analytic amplitudes need gamma_c > 0 (resonant denominators)".into(),
        ));
    }
    if params.omega_drive > 0.3 * params.gamma_c {
        log::warn!(
            "Omega/gamma_c = {:.3} is outside the weak-driving regime; \
             the perturbative amplitudes degrade",
            params.omega_drive / params.gamma_c
        );
    }

    let nb = n_phonon_max + 1;
    let lvl1 = dressed_level(params, 1, 0)?;
    let lvl2 = dressed_level(params, 2, 0)?;
    let eta1 = lvl1.eta_s;
    let eta2 = lvl2.eta_s;
    let gc = params.gamma_c;

    // <m~(1)|0>_b = <m|S(eta0 - eta1)|0>
    let mut ov10 = vec![0.0f64; nb];
    for (m, slot) in ov10.iter_mut().enumerate() {
        *slot = squeeze_matrix_element(m, 0, -eta1)?;
    }
    // <m~(2)|n~(1)>_b = <m|S(eta1 - eta2)|n>
    let mut ov21 = vec![0.0f64; nb * nb];
    for m in 0..nb {
        for n in 0..nb {
            if (m + n) % 2 == 0 {
                ov21[m * nb + n] = squeeze_matrix_element(m, n, eta1 - eta2)?;
            }
        }
    }

    let e1 = |m: usize| params.delta_c + m as f64 * lvl1.omega_s + lvl1.delta_s;
    let e2 = |m: usize| 2.0 * params.delta_c + m as f64 * lvl2.omega_s + lvl2.delta_s;

    let mut c1 = vec![C64::new(0.0, 0.0); nb];
    for (m, slot) in c1.iter_mut().enumerate() {
        let den = C64::new(e1(m), -0.5 * gc);
        *slot = C64::new(-params.omega_drive * ov10[m], 0.0) / den;
    }

    let mut c2 = vec![C64::new(0.0, 0.0); nb];
    let two_photon_scale = C64::new(2f64.sqrt() * params.omega_drive * params.omega_drive, 0.0);
    for (m, slot) in c2.iter_mut().enumerate() {
        let den2 = C64::new(e2(m), -gc);
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..nb {
            let num = ov21[m * nb + n] * ov10[n];
            if num != 0.0 {
                let den1 = C64::new(e1(n), -0.5 * gc);
                acc += C64::new(num, 0.0) / (den2 * den1);
            }
        }
        *slot = two_photon_scale * acc;
    }

    let mut c0 = vec![0.0f64; nb];
    c0[0] = 1.0;
    Ok(AmplitudeSet { c0, c1, c2, n_phonon_max })
}

/// Amplitudes with the phonon sums refined by doubling the truncation until
/// g2(0) changes by less than 1e-8 relative, up to four times the requested
/// size. Carries both partial values in the error on non-convergence.
pub fn longtime_amplitudes(params: &ModelParams, n_phonon_max: usize) -> Result<AmplitudeSet> {
    let base = longtime_amplitudes_fixed(params, n_phonon_max)?;
    if params.omega_drive == 0.0 {
        return Ok(base); // no photons, nothing to converge
    }
    let mut prev = base;
    let mut prev_g2 = g2_analytic(&prev)?;
    for factor in [2usize, 4] {
        let refined = longtime_amplitudes_fixed(params, n_phonon_max * factor)?;
        let g2 = g2_analytic(&refined)?;
        if (g2 - prev_g2).abs() <= CONVERGENCE_RTOL * g2.abs() {
            return Ok(refined);
        }
        prev = refined;
        prev_g2 = g2;
        let _ = &prev;
    }
    let last = longtime_amplitudes_fixed(params, n_phonon_max * 4)?;
    Err(Error::Convergence {
        context: "analytic phonon sums".into(),
        prev: prev_g2,
        last: g2_analytic(&last)?,
    })
}

/// g2(0) = 2 P_2 / (P_1 + 2 P_2)^2 from the long-time amplitudes.
pub fn g2_analytic(amps: &AmplitudeSet) -> Result<f64> {
    let p1 = amps.p1();
    let p2 = amps.p2();
    let n_mean = p1 + 2.0 * p2;
    if n_mean <= 0.0 {
        return Err(Error::UndefinedCorrelation { n_mean });
    }
    Ok(2.0 * p2 / (n_mean * n_mean))
}

/// Weak-driving estimator 2 P_2 / P_1^2 (diagnostic companion to
/// [`g2_analytic`]; the two agree up to O((Omega/gamma_c)^2) corrections).
pub fn g2_weak_drive(amps: &AmplitudeSet) -> Result<f64> {
    let p1 = amps.p1();
    if p1 <= 0.0 {
        return Err(Error::UndefinedCorrelation { n_mean: p1 });
    }
    Ok(2.0 * amps.p2() / (p1 * p1))
}

/// Small-coupling closed form
/// g2(0) = [4(Delta_c + delta1)^2 + gamma_c^2] / [(2 Delta_c + delta2)^2 + gamma_c^2],
/// valid for g0/omega_m << 1. `delta_c` overrides the detuning in `params`.
pub fn g2_small_g0(delta_c: f64, params: &ModelParams) -> Result<f64> {
    let d1 = dressed_level(params, 1, 0)?.delta_s;
    let d2 = dressed_level(params, 2, 0)?.delta_s;
    let gc2 = params.gamma_c * params.gamma_c;
    Ok((4.0 * (delta_c + d1).powi(2) + gc2) / ((2.0 * delta_c + d2).powi(2) + gc2))
}

/// Correlation at single-photon resonance, Delta_c = -delta1:
/// gamma_c^2 / [(delta2 - 2 delta1)^2 + gamma_c^2]. Below one whenever the
/// anharmonicity is finite.
pub fn g2_spr(params: &ModelParams) -> Result<f64> {
    let d1 = dressed_level(params, 1, 0)?.delta_s;
    let d2 = dressed_level(params, 2, 0)?.delta_s;
    let gc2 = params.gamma_c * params.gamma_c;
    Ok(gc2 / ((d2 - 2.0 * d1).powi(2) + gc2))
}

/// Correlation at two-photon resonance, Delta_c = -delta2/2:
/// [(delta2 - 2 delta1)^2 + gamma_c^2] / gamma_c^2. The product
/// g2_spr * g2_tpr is one by construction.
pub fn g2_tpr(params: &ModelParams) -> Result<f64> {
    let d1 = dressed_level(params, 1, 0)?.delta_s;
    let d2 = dressed_level(params, 2, 0)?.delta_s;
    let gc2 = params.gamma_c * params.gamma_c;
    Ok(((d2 - 2.0 * d1).powi(2) + gc2) / gc2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn blockade_params() -> ModelParams {
        ModelParams {
            delta_c: -0.5247,
            g0: 0.8,
            omega_drive: 0.01,
            gamma_c: 0.1,
            ..Default::default()
        }
    }

    #[test]
    fn no_drive_means_no_amplitudes() {
        let params = ModelParams { g0: 0.8, gamma_c: 0.1, ..Default::default() };
        let amps = longtime_amplitudes(&params, 12).unwrap();
        assert!(amps.c1().iter().all(|c| c.norm() == 0.0));
        assert!(amps.c2().iter().all(|c| c.norm() == 0.0));
        assert!(matches!(
            g2_analytic(&amps),
            Err(Error::UndefinedCorrelation { .. })
        ));
    }

    #[test]
    fn decoupled_resonant_cavity_is_coherent() {
        // g0 = 0, Delta_c = 0: all overlaps are Kronecker deltas, so only the
        // m = 0 amplitudes survive:
        //   |c1|^2 = Omega^2/(gamma_c/2)^2,  |c2|^2 = 2 Omega^4/(gamma_c^2 (gamma_c/2)^2)
        // giving P2 = P1^2/2 and a weak-drive estimator of exactly one.
        let params = ModelParams {
            omega_drive: 0.001,
            gamma_c: 0.1,
            ..Default::default()
        };
        let amps = longtime_amplitudes(&params, 10).unwrap();
        let x2 = (params.omega_drive / (params.gamma_c / 2.0)).powi(2);
        assert_abs_diff_eq!(amps.p1(), x2, epsilon = 1e-15);
        assert_abs_diff_eq!(amps.p2(), x2 * x2 / 2.0, epsilon = 1e-18);
        for m in 1..amps.c1().len() {
            assert_eq!(amps.c1()[m].norm(), 0.0);
            assert_eq!(amps.c2()[m].norm(), 0.0);
        }
        assert_abs_diff_eq!(g2_weak_drive(&amps).unwrap(), 1.0, epsilon = 1e-12);
        // exact estimator picks up the (1 + P1)^-2 normalization
        let expect = 1.0 / (1.0 + x2).powi(2);
        assert_abs_diff_eq!(g2_analytic(&amps).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn amplitudes_scale_perturbatively_in_drive() {
        let p1 = blockade_params();
        let p2 = ModelParams { omega_drive: 2.0 * p1.omega_drive, ..p1 };
        let a1 = longtime_amplitudes_fixed(&p1, 20).unwrap();
        let a2 = longtime_amplitudes_fixed(&p2, 20).unwrap();
        for m in 0..=20 {
            assert_abs_diff_eq!(a2.c1()[m].norm(), 2.0 * a1.c1()[m].norm(), epsilon = 1e-15);
            assert_abs_diff_eq!(a2.c2()[m].norm(), 4.0 * a1.c2()[m].norm(), epsilon = 1e-15);
        }
        // the weak-drive estimator is exactly drive-independent
        assert_abs_diff_eq!(
            g2_weak_drive(&a1).unwrap(),
            g2_weak_drive(&a2).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn estimators_agree_at_blockade_point() {
        // At the D2 detuning the two-photon probability is strongly
        // suppressed, so the exact and weak-drive estimators coincide well
        // inside 1% even at Omega/gamma_c = 0.1.
        let lvl1 = dressed_level(&blockade_params(), 1, 0).unwrap();
        let params = ModelParams {
            delta_c: -(lvl1.delta_s + 2.0 * lvl1.omega_s),
            ..blockade_params()
        };
        let amps = longtime_amplitudes(&params, DEFAULT_N_PHONON).unwrap();
        let exact = g2_analytic(&amps).unwrap();
        let weak = g2_weak_drive(&amps).unwrap();
        assert!((exact / weak - 1.0).abs() < 0.01, "exact {exact:.4e} weak {weak:.4e}");
        // at the coherent point the correction has the closed form (1+2P2/P1)^-2
        let coherent = ModelParams {
            delta_c: 0.0,
            g0: 0.0,
            omega_drive: 0.01,
            gamma_c: 0.1,
            ..Default::default()
        };
        let amps = longtime_amplitudes(&coherent, 10).unwrap();
        let ratio = g2_analytic(&amps).unwrap() / g2_weak_drive(&amps).unwrap();
        let expect = (1.0 + 2.0 * amps.p2() / amps.p1()).powi(-2);
        assert_abs_diff_eq!(ratio, expect, epsilon = 1e-12);
    }

    #[test]
    fn truncation_doubling_is_converged_at_default() {
        let params = blockade_params();
        let base = longtime_amplitudes_fixed(&params, DEFAULT_N_PHONON).unwrap();
        let doubled = longtime_amplitudes_fixed(&params, 2 * DEFAULT_N_PHONON).unwrap();
        let g2_base = g2_analytic(&base).unwrap();
        let g2_doubled = g2_analytic(&doubled).unwrap();
        assert!(
            ((g2_base - g2_doubled) / g2_doubled).abs() < 1e-6,
            "truncation drift {:.3e}",
            ((g2_base - g2_doubled) / g2_doubled).abs()
        );
    }

    #[test]
    fn small_g0_form_limits() {
        let free = ModelParams { gamma_c: 0.1, ..Default::default() };
        for &dc in &[-2.0, -0.5, 0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(g2_small_g0(dc, &free).unwrap(), 1.0, epsilon = 1e-14);
        }
        let params = ModelParams { g0: 0.05, gamma_c: 0.02, ..Default::default() };
        let d1 = dressed_level(&params, 1, 0).unwrap().delta_s;
        let d2 = dressed_level(&params, 2, 0).unwrap().delta_s;
        let at_spr = g2_small_g0(-d1, &params).unwrap();
        assert_abs_diff_eq!(at_spr, g2_spr(&params).unwrap(), epsilon = 1e-14);
        assert!(at_spr < 1.0);
        let at_tpr = g2_small_g0(-d2 / 2.0, &params).unwrap();
        assert_abs_diff_eq!(at_tpr, g2_tpr(&params).unwrap(), epsilon = 1e-12);
        assert!(at_tpr > 1.0);
    }

    #[test]
    fn resonance_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let params = ModelParams {
                g0: rng.random::<f64>().max(1e-6),
                gamma_c: 0.01 + 2.0 * rng.random::<f64>(),
                ..Default::default()
            };
            let product = g2_spr(&params).unwrap() * g2_tpr(&params).unwrap();
            assert!((product - 1.0).abs() < 1e-12, "product {product:.15}");
        }
        // g0 = 0 forces both factors to one
        let free = ModelParams { gamma_c: 0.3, ..Default::default() };
        assert_abs_diff_eq!(g2_spr(&free).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g2_tpr(&free).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn kerr_limit_of_spr_correlation() {
        // For small g0 the anharmonicity approaches -2 g0^2/omega_m, i.e. a
        // Kerr cavity with parameter g0^2/omega_m. At gamma_c = 0.01 the
        // residual relative difference is ~5e-5 (it scales like
        // 48 g0^5 / (4 g0^4 + gamma_c^2)).
        let params = ModelParams { g0: 0.01, gamma_c: 0.01, ..Default::default() };
        let kerr = params.gamma_c.powi(2)
            / (4.0 * (params.g0 * params.g0 / params.omega_m).powi(2) + params.gamma_c.powi(2));
        let spr = g2_spr(&params).unwrap();
        assert!(((spr - kerr) / spr).abs() < 1e-4, "rel diff {:.3e}", ((spr - kerr) / spr).abs());
    }

    #[test]
    fn analytic_dips_and_peaks_sit_at_resonance_detunings() {
        // scan the detuning axis and locate interior extrema of g2
        let base = ModelParams {
            g0: 0.8,
            omega_drive: 0.001,
            gamma_c: 0.1,
            ..Default::default()
        };
        let lvl1 = dressed_level(&base, 1, 0).unwrap();
        let lvl2 = dressed_level(&base, 2, 0).unwrap();
        let step = 0.01;
        let n_points = ((1.0f64 - (-6.2)) / step).round() as usize + 1;
        let mut g2 = Vec::with_capacity(n_points);
        let mut grid = Vec::with_capacity(n_points);
        for k in 0..n_points {
            let dc = -6.2 + step * k as f64;
            let params = ModelParams { delta_c: dc, ..base };
            let amps = longtime_amplitudes_fixed(&params, DEFAULT_N_PHONON).unwrap();
            grid.push(dc);
            g2.push(g2_analytic(&amps).unwrap());
        }
        let minima: Vec<f64> = (1..n_points - 1)
            .filter(|&k| g2[k] < g2[k - 1] && g2[k] < g2[k + 1])
            .map(|k| grid[k])
            .collect();
        let maxima: Vec<f64> = (1..n_points - 1)
            .filter(|&k| g2[k] > g2[k - 1] && g2[k] > g2[k + 1])
            .map(|k| grid[k])
            .collect();
        let near = |list: &[f64], target: f64| {
            list.iter().any(|x| (x - target).abs() <= step + 1e-12)
        };
        for l in [0u32, 2] {
            let dip = -(lvl1.delta_s + l as f64 * lvl1.omega_s);
            assert!(near(&minima, dip), "no dip near D{l} = {dip:.5}");
        }
        for l in [0u32, 2, 4] {
            let peak = -(lvl2.delta_s + l as f64 * lvl2.omega_s) / 2.0;
            assert!(near(&maxima, peak), "no peak near P{l} = {peak:.5}");
        }
    }
}
