//! Parameter-scan engine with per-point truncation control.
//!
//! A sweep walks one or two parameter axes, resolves the drive condition at
//! every grid point (resonant detunings follow the point's own coupling),
//! runs the requested solvers, and collects one record per point - including
//! skipped and failed points, which never abort the scan. Points are
//! independent and run in parallel; records come back in deterministic grid
//! order.

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{FockSpace, ModelParams};
use crate::lindblad::{self, DensityMatrix};
use crate::perturbation;
use crate::spectrum::dressed_level;

/// Which scalar parameter an axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    DeltaC,
    G0,
    GammaC,
    GammaM,
    NTh,
    OmegaDrive,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::DeltaC => "delta_c",
            SweepParameter::G0 => "g0",
            SweepParameter::GammaC => "gamma_c",
            SweepParameter::GammaM => "gamma_m",
            SweepParameter::NTh => "n_th",
            SweepParameter::OmegaDrive => "omega_drive",
        }
    }

    pub fn apply(&self, params: &mut ModelParams, value: f64) {
        match self {
            SweepParameter::DeltaC => params.delta_c = value,
            SweepParameter::G0 => params.g0 = value,
            SweepParameter::GammaC => params.gamma_c = value,
            SweepParameter::GammaM => params.gamma_m = value,
            SweepParameter::NTh => params.n_th = value,
            SweepParameter::OmegaDrive => params.omega_drive = value,
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta_c" => Ok(SweepParameter::DeltaC),
            "g0" => Ok(SweepParameter::G0),
            "gamma_c" => Ok(SweepParameter::GammaC),
            "gamma_m" => Ok(SweepParameter::GammaM),
            "n_th" => Ok(SweepParameter::NTh),
            "omega_drive" => Ok(SweepParameter::OmegaDrive),
            other => Err(Error::Parameter(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

/// One sweep axis: a parameter and its grid values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn from_values(parameter: SweepParameter, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter(format!("axis {} has no values", parameter.name())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "axis {} contains non-finite values",
                parameter.name()
            )));
        }
        Ok(Axis { parameter, values })
    }

    pub fn linspace(parameter: SweepParameter, start: f64, stop: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Parameter("axis needs at least 2 points".into()));
        }
        let step = (stop - start) / (points - 1) as f64;
        Axis::from_values(parameter, (0..points).map(|k| start + step * k as f64).collect())
    }
}

/// How the driving detuning is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveCondition {
    /// Use delta_c as given by the base parameters / axes.
    FixedDetuning,
    /// Delta_c = -(delta1 + l * omega1): single-photon resonance, sideband l.
    SinglePhotonResonance { sideband: u32 },
    /// Delta_c = -(delta2 + l * omega2)/2: two-photon resonance, sideband l.
    TwoPhotonResonance { sideband: u32 },
}

impl DriveCondition {
    /// Detuning for this condition at the point's parameters.
    pub fn resolve_detuning(&self, params: &ModelParams) -> Result<f64> {
        match self {
            DriveCondition::FixedDetuning => Ok(params.delta_c),
            DriveCondition::SinglePhotonResonance { sideband } => {
                let lvl = dressed_level(params, 1, 0)?;
                Ok(-(lvl.delta_s + *sideband as f64 * lvl.omega_s))
            }
            DriveCondition::TwoPhotonResonance { sideband } => {
                let lvl = dressed_level(params, 2, 0)?;
                Ok(-(lvl.delta_s + *sideband as f64 * lvl.omega_s) / 2.0)
            }
        }
    }
}

impl std::str::FromStr for DriveCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "fixed" {
            return Ok(DriveCondition::FixedDetuning);
        }
        let parse_sideband = |rest: &str| -> Result<u32> {
            rest.parse::<u32>()
                .map_err(|_| Error::Parameter(format!("bad sideband index in drive '{s}'")))
        };
        if let Some(rest) = s.strip_prefix("spr:") {
            return Ok(DriveCondition::SinglePhotonResonance { sideband: parse_sideband(rest)? });
        }
        if let Some(rest) = s.strip_prefix("tpr:") {
            return Ok(DriveCondition::TwoPhotonResonance { sideband: parse_sideband(rest)? });
        }
        Err(Error::Parameter(format!(
            "unknown drive condition '{s}' (expected fixed, spr:<l> or tpr:<l>)"
        )))
    }
}

impl std::fmt::Display for DriveCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DriveCondition::FixedDetuning => write!(f, "fixed"),
            DriveCondition::SinglePhotonResonance { sideband } => write!(f, "spr:{sideband}"),
            DriveCondition::TwoPhotonResonance { sideband } => write!(f, "tpr:{sideband}"),
        }
    }
}

/// Phonon-truncation ladder for the numeric solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub n_photon_max: usize,
    /// starting n_phonon_max; doubled until g2 settles
    pub n_phonon_start: usize,
    pub n_phonon_cap: usize,
    /// relative g2 change accepted between doublings
    pub rel_tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            n_photon_max: 4,
            n_phonon_start: 25,
            n_phonon_cap: 100,
            rel_tolerance: 1e-4,
        }
    }
}

/// Full description of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub drive: DriveCondition,
    pub analytic: bool,
    pub numeric: bool,
    pub truncation: TruncationPolicy,
}

/// One grid point's outcome. Optional fields stay empty when the matching
/// solver was not requested or failed; `status` says why.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub axis1_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis2_value: Option<f64>,
    /// fully resolved point parameters (drive condition applied)
    pub params: ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g2_numeric: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g2_analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric_p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric_p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_phonon_used: Option<usize>,
    pub status: String,
    pub wall_time_s: f64,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Resolved inputs and artifact version stored alongside the records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact: String,
    pub version: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub provenance: Provenance,
    pub records: Vec<SweepRecord>,
}

/// Labeled resonance feature of the detuning axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonanceDetuning {
    /// "D<l>" for dips (single-photon), "P<l>" for peaks (two-photon)
    pub label: String,
    pub sideband: u32,
    pub delta_c: f64,
    /// even sidebands dominate; odd ones are parity-suppressed
    pub parity_dominant: bool,
}

/// Dip and peak detunings D_l, P_l for l = 0..=l_max.
pub fn resonance_detunings(params: &ModelParams, l_max: u32) -> Result<Vec<ResonanceDetuning>> {
    let lvl1 = dressed_level(params, 1, 0)?;
    let lvl2 = dressed_level(params, 2, 0)?;
    let mut out = Vec::with_capacity(2 * (l_max as usize + 1));
    for l in 0..=l_max {
        out.push(ResonanceDetuning {
            label: format!("D{l}"),
            sideband: l,
            delta_c: -(lvl1.delta_s + l as f64 * lvl1.omega_s),
            parity_dominant: l % 2 == 0,
        });
    }
    for l in 0..=l_max {
        out.push(ResonanceDetuning {
            label: format!("P{l}"),
            sideband: l,
            delta_c: -(lvl2.delta_s + l as f64 * lvl2.omega_s) / 2.0,
            parity_dominant: l % 2 == 0,
        });
    }
    Ok(out)
}

/// Worker pool sized by the QUADBLOCKADE_THREADS environment variable
/// (default: all cores).
fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(v) = std::env::var("QUADBLOCKADE_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n > 0 {
                    builder = builder.num_threads(n);
                }
            }
        }
        builder.build().expect("worker pool")
    })
}

/// Numeric g2 with the doubling ladder. Returns the value, populations,
/// the n_phonon_max actually used, and whether the ladder converged.
fn numeric_ladder(
    params: &ModelParams,
    policy: &TruncationPolicy,
) -> Result<(DensityMatrix, usize, bool)> {
    let mut n_phonon = policy.n_phonon_start;
    let space = FockSpace::new(policy.n_photon_max, n_phonon)?;
    let liouv = lindblad::build_liouvillian(params, &space)?;
    let mut rho = lindblad::steady_state(&liouv)?;
    let mut g2 = lindblad::g2_numeric(&rho)?;
    while n_phonon * 2 <= policy.n_phonon_cap {
        n_phonon *= 2;
        let space = FockSpace::new(policy.n_photon_max, n_phonon)?;
        let liouv = lindblad::build_liouvillian(params, &space)?;
        let refined = lindblad::steady_state_with(
            &liouv,
            lindblad::SteadyStateMethod::Auto,
            Some(&rho),
        )?;
        let g2_refined = lindblad::g2_numeric(&refined)?;
        let converged = (g2_refined - g2).abs() <= policy.rel_tolerance * g2_refined.abs();
        rho = refined;
        g2 = g2_refined;
        if converged {
            let n_used = rho.space().n_phonon_max();
            return Ok((rho, n_used, true));
        }
    }
    let n_used = rho.space().n_phonon_max();
    Ok((rho, n_used, false))
}

fn run_point(spec: &SweepSpec, a1: f64, a2: Option<f64>) -> SweepRecord {
    let start = Instant::now();
    let mut params = spec.base;
    spec.axis1.parameter.apply(&mut params, a1);
    if let (Some(axis2), Some(v)) = (&spec.axis2, a2) {
        axis2.parameter.apply(&mut params, v);
    }

    let mut record = SweepRecord {
        axis1_value: a1,
        axis2_value: a2,
        params,
        g2_numeric: None,
        g2_analytic: None,
        analytic_p1: None,
        analytic_p2: None,
        numeric_p1: None,
        numeric_p2: None,
        n_mean: None,
        n_phonon_used: None,
        status: "ok".into(),
        wall_time_s: 0.0,
    };

    // the drive condition follows the point's own coupling
    match spec.drive.resolve_detuning(&params) {
        Ok(dc) => {
            params.delta_c = dc;
            record.params = params;
        }
        Err(e) => {
            record.status = format!("skipped: {e}");
            record.wall_time_s = start.elapsed().as_secs_f64();
            return record;
        }
    }
    if let Err(e) = params.check_stability(spec.truncation.n_photon_max) {
        record.status = format!("skipped: {e}");
        record.wall_time_s = start.elapsed().as_secs_f64();
        return record;
    }

    let mut failures: Vec<String> = Vec::new();

    if spec.analytic {
        match perturbation::longtime_amplitudes(&params, perturbation::DEFAULT_N_PHONON)
            .and_then(|amps| perturbation::g2_analytic(&amps).map(|g2| (amps, g2)))
        {
            Ok((amps, g2)) => {
                record.g2_analytic = Some(g2);
                record.analytic_p1 = Some(amps.p1());
                record.analytic_p2 = Some(amps.p2());
            }
            Err(e) => failures.push(format!("analytic: {e}")),
        }
    }

    if spec.numeric {
        match numeric_ladder(&params, &spec.truncation) {
            Ok((rho, n_used, converged)) => match lindblad::g2_numeric(&rho) {
                Ok(g2) => {
                    record.g2_numeric = Some(g2);
                    record.numeric_p1 = Some(rho.photon_population(1));
                    record.numeric_p2 = Some(rho.photon_population(2));
                    record.n_mean = Some(rho.mean_photon_number());
                    record.n_phonon_used = Some(n_used);
                    if !converged {
                        failures.push(format!(
                            "unconverged: g2 still moving at n_phonon_max = {n_used}"
                        ));
                    }
                }
                Err(e) => failures.push(format!("numeric: {e}")),
            },
            Err(e) => failures.push(format!("numeric: {e}")),
        }
    }

    if !failures.is_empty() {
        record.status = failures.join("; ");
    }
    record.wall_time_s = start.elapsed().as_secs_f64();
    record
}

/// Evaluate the requested solvers at every grid point. Point failures are
/// captured in their records; the sweep itself always completes.
pub fn run_sweep(spec: &SweepSpec) -> SweepResult {
    let grid: Vec<(f64, Option<f64>)> = match &spec.axis2 {
        Some(axis2) => axis2
            .values
            .iter()
            .flat_map(|&v2| spec.axis1.values.iter().map(move |&v1| (v1, Some(v2))))
            .collect(),
        None => spec.axis1.values.iter().map(|&v| (v, None)).collect(),
    };

    let records: Vec<SweepRecord> = thread_pool().install(|| {
        grid.par_iter().map(|&(a1, a2)| run_point(spec, a1, a2)).collect()
    });

    SweepResult {
        provenance: Provenance {
            artifact: "quadblockade".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            spec: spec.clone(),
        },
        records,
    }
}
