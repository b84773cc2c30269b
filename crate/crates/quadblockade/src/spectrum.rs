//! Closed-form eigenstructure of the undriven Hamiltonian and squeeze-operator
//! matrix elements between phonon number states.
//!
//! With s photons in the cavity the membrane sees a renormalized frequency
//! omega_m^(s) = omega_m * sqrt(1 + 4 s g0 / omega_m); its eigenstates are
//! squeezed number states, and transition amplitudes between manifolds reduce
//! to matrix elements of a single squeeze operator. The finite double sum for
//! <m|S(xi)|n> alternates in sign and cancels catastrophically at large
//! indices, so it is evaluated with log-factorials and magnitude-ordered
//! accumulation, and values outside the vetted index window are flagged.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hilbert::ModelParams;

/// Guaranteed-accuracy window for [`squeeze_element`]; see the module docs.
pub const SQUEEZE_INDEX_LIMIT: usize = 30;
pub const SQUEEZE_XI_LIMIT: f64 = 1.5;

/// One eigenlevel |s>_a |m~(s)>_b of the undriven system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedLevel {
    /// Photon number.
    pub s: usize,
    /// Phonon quantum number within the s-photon manifold.
    pub m: usize,
    /// Eigenenergy E_{s,m} = s*delta_c + m*omega_s + delta_s.
    pub energy: f64,
    /// Dressed mechanical frequency omega_m^(s).
    pub omega_s: f64,
    /// Zero-point shift delta^(s) = (omega_m^(s) - omega_m)/2.
    pub delta_s: f64,
    /// Squeezing factor eta^(s) = ln(1 + 4 s g0/omega_m)/4.
    pub eta_s: f64,
}

/// Dressed frequency, shift, squeeze factor and energy of level (s, m).
pub fn dressed_level(params: &ModelParams, s: usize, m: usize) -> Result<DressedLevel> {
    let ratio = 1.0 + 4.0 * s as f64 * params.g0 / params.omega_m;
    if ratio <= 0.0 {
        return Err(Error::Stability {
            photon_number: s,
            value: params.omega_m * ratio,
        });
    }
    let omega_s = params.omega_m * ratio.sqrt();
    let delta_s = 0.5 * (omega_s - params.omega_m);
    let eta_s = 0.25 * ratio.ln();
    Ok(DressedLevel {
        s,
        m,
        energy: s as f64 * params.delta_c + m as f64 * omega_s + delta_s,
        omega_s,
        delta_s,
        eta_s,
    })
}

/// Squeeze matrix element together with its confidence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeElement {
    pub value: f64,
    /// Set when (m, n, xi) falls outside the vetted accuracy window.
    pub low_confidence: bool,
}

fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; 512];
        for k in 2..t.len() {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    table[n]
}

/// <m| S(xi) |n> with S(xi) = exp[xi (b^2 - b'^2)/2], evaluated by the finite
/// parity-restricted sum with log-factorial stabilization. The element is
/// real; elements of odd total parity vanish identically.
pub fn squeeze_element(m: usize, n: usize, xi: f64) -> Result<SqueezeElement> {
    if !xi.is_finite() {
        return Err(Error::Parameter(format!("squeeze factor xi = {xi} must be finite")));
    }
    if m >= 500 || n >= 500 {
        return Err(Error::Dimension(format!(
            "squeeze element indices ({m}, {n}) beyond supported table"
        )));
    }
    let low_confidence =
        m > SQUEEZE_INDEX_LIMIT || n > SQUEEZE_INDEX_LIMIT || xi.abs() > SQUEEZE_XI_LIMIT;

    // parity selection from the Kronecker delta in the double sum
    if (m + n) % 2 == 1 {
        return Ok(SqueezeElement { value: 0.0, low_confidence });
    }
    if xi == 0.0 {
        let value = if m == n { 1.0 } else { 0.0 };
        return Ok(SqueezeElement { value, low_confidence });
    }

    let cosh = xi.cosh();
    let tanh = xi.tanh();
    let ln_cosh = cosh.ln();
    let ln_half_tanh_abs = (tanh.abs() / 2.0).ln();
    let tanh_sign_neg = tanh < 0.0;

    // collapse the double sum with the delta m - 2l' = n - 2l:
    // l' = l + (m - n)/2, summed over valid l
    let d = (m as i64 - n as i64) / 2;
    let l_min = (-d).max(0) as usize;
    let l_max = n / 2;
    let prefactor_log = 0.5 * (ln_factorial(m) + ln_factorial(n)) - (n as f64 + 0.5) * ln_cosh;

    let mut terms: Vec<(f64, f64)> = Vec::new();
    for l in l_min..=l_max {
        let lp = (l as i64 + d) as usize;
        debug_assert!(lp <= m / 2);
        let pow = 2 * l as i64 + d; // exponent of (tanh/2)
        debug_assert!(pow >= 0);
        let mut log_mag = prefactor_log - ln_factorial(l) - ln_factorial(lp)
            - ln_factorial(n - 2 * l)
            + 2.0 * l as f64 * ln_cosh;
        if pow > 0 {
            log_mag += pow as f64 * ln_half_tanh_abs;
        }
        let mut negative = lp % 2 == 1; // (-1)^{l'}
        if tanh_sign_neg && pow % 2 == 1 {
            negative = !negative;
        }
        let sign = if negative { -1.0 } else { 1.0 };
        terms.push((log_mag, sign));
    }
    // accumulate in descending magnitude relative to the largest term
    terms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let max_log = terms[0].0;
    if !max_log.is_finite() {
        return Ok(SqueezeElement { value: 0.0, low_confidence });
    }
    let mut acc = 0.0f64;
    for &(log_mag, sign) in &terms {
        acc += sign * (log_mag - max_log).exp();
    }
    if acc == 0.0 {
        return Ok(SqueezeElement { value: 0.0, low_confidence });
    }
    let total_log = max_log + acc.abs().ln();
    if total_log > 700.0 {
        return Err(Error::NumericRange(format!(
            "squeeze element ({m}, {n}, xi={xi:.4}) overflows despite stabilization"
        )));
    }
    Ok(SqueezeElement { value: acc.signum() * total_log.exp(), low_confidence })
}

/// Plain value of <m| S(xi) |n>.
pub fn squeeze_matrix_element(m: usize, n: usize, xi: f64) -> Result<f64> {
    squeeze_element(m, n, xi).map(|e| e.value)
}

/// Inter-manifold phonon overlap <m~(s) | n~(s')>_b
/// = <m| S(eta^(s') - eta^(s)) |n>_b.
pub fn overlap(params: &ModelParams, s: usize, m: usize, s_prime: usize, n: usize) -> Result<f64> {
    let eta_s = dressed_level(params, s, 0)?.eta_s;
    let eta_sp = dressed_level(params, s_prime, 0)?.eta_s;
    squeeze_matrix_element(m, n, eta_sp - eta_s)
}
