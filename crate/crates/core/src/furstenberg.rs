//! Iteration of `f ↦ f ∗ μ` for an even measure `μ`, with the quantities
//! that decide whether bounded solutions of `f ∗ μ = f` must be constant.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::measure::EvenMeasure;
use crate::params::{JacobiParams, SpectralPoint, STRIP_TIE_TOL};
use crate::quadrature::QuadratureSpec;
use crate::tauberian::{delta_irho, DecayEstimate, StripScanGrid};
use crate::transform::forward_transform_measure;
use crate::translation::{convolve_measure, Convolved};

/// Lower bound accepted for `(ρ - x) log|1 - μ̂(ix)|` at the deepest probe.
pub const IRHO_FLOOR: f64 = -0.05;

/// One application of `f ↦ f ∗ μ`; the result lives on `[0, f.tmax - reach(μ)]`.
pub fn harmonic_step(
    params: &JacobiParams,
    f: &GridFunction,
    mu: &EvenMeasure,
    quad: &QuadratureSpec,
) -> Result<Convolved> {
    convolve_measure(params, f, mu, quad)
}

/// `sup - inf` of a real grid; for complex values the diameter of the
/// bounding box of the values.
pub fn flatness(f: &GridFunction) -> f64 {
    let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for v in f.values() {
        lo.re = lo.re.min(v.re);
        lo.im = lo.im.min(v.im);
        hi.re = hi.re.max(v.re);
        hi.im = hi.im.max(v.im);
    }
    (hi - lo).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub valid_tmax: f64,
    pub flatness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub lambda: f64,
    pub muhat: Complex64,
    /// `|μ̂(λ)|^k` for `k = 1..=n`.
    pub decay_seq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicIterationReport {
    pub n: usize,
    /// Step 0 is the initial function.
    pub steps: Vec<StepRecord>,
    pub probes: Vec<ProbeRecord>,
    /// Raised when no step made the iterate flatter, the signature of a
    /// measure outside the hypotheses (for instance `|μ̂| > 1` somewhere).
    pub flatness_non_decreasing: bool,
    pub flatness_strictly_decreasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<MuConditions>,
}

/// The report together with every iterate.
#[derive(Debug, Clone)]
pub struct HarmonicRun {
    pub report: HarmonicIterationReport,
    pub iterates: Vec<GridFunction>,
}

/// Apply `n` steps and record flatness and the spectral factors at `probes`.
pub fn iterate_and_report(
    params: &JacobiParams,
    f: &GridFunction,
    mu: &EvenMeasure,
    n: usize,
    probes: &[f64],
    quad: &QuadratureSpec,
) -> Result<HarmonicRun> {
    let need = n as f64 * mu.reach();
    if need > f.tmax() {
        return Err(Error::domain(format!(
            "{n} steps of reach {} need tmax ≥ {need}, got {}",
            mu.reach(),
            f.tmax()
        )));
    }
    let mut steps = vec![StepRecord {
        step: 0,
        valid_tmax: f.tmax(),
        flatness: flatness(f),
    }];
    let mut iterates = vec![f.clone()];
    for k in 1..=n {
        let next = harmonic_step(params, iterates.last().expect("non-empty"), mu, quad)?;
        steps.push(StepRecord {
            step: k,
            valid_tmax: next.valid_tmax,
            flatness: flatness(&next.grid),
        });
        iterates.push(next.grid);
    }
    let probes = probes
        .iter()
        .map(|&l| {
            let muhat = forward_transform_measure(params, mu, SpectralPoint::real(l), quad)?;
            let decay_seq = (1..=n).map(|k| muhat.norm().powi(k as i32)).collect();
            Ok(ProbeRecord {
                lambda: l,
                muhat,
                decay_seq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = steps[0].flatness.max(f64::MIN_POSITIVE);
    let flatness_non_decreasing = n > 0 && steps.windows(2).all(|w| w[1].flatness >= w[0].flatness - 1e-12 * scale);
    let flatness_strictly_decreasing = n > 0 && steps.windows(2).all(|w| w[1].flatness < w[0].flatness);
    Ok(HarmonicRun {
        report: HarmonicIterationReport {
            n,
            steps,
            probes,
            flatness_non_decreasing,
            flatness_strictly_decreasing,
            conditions: None,
        },
        iterates,
    })
}

/// The hypotheses on `μ` under which bounded `μ`-harmonic functions are
/// constant, checked numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuConditions {
    pub mass: Complex64,
    pub atom0: Complex64,
    /// `min |μ̂ - 1|` over scan points away from `±iρ`.
    pub min_gap_off_rho: f64,
    /// Scan points (off `±iρ`) where `|μ̂ - 1|` is below the threshold.
    pub zero_candidates: Vec<Complex64>,
    /// `(ρ - x) log|1 - μ̂(ix)|` near `x = ρ`.
    pub irho: DecayEstimate,
    pub unit_mass: bool,
    pub atom0_not_one: bool,
    pub satisfied: bool,
}

/// Scan points with `|μ̂ - 1|` below this count as zero candidates.
pub const GAP_THRESHOLD: f64 = 1e-8;

pub fn check_mu_conditions(
    params: &JacobiParams,
    mu: &EvenMeasure,
    grid: &StripScanGrid,
    levels: usize,
    quad: &QuadratureSpec,
) -> Result<MuConditions> {
    grid.validate(params)?;
    let rho = params.rho();
    let mass = mu.mass(params, quad)?;
    let atom0 = mu.atom0();
    let poles = [Complex64::new(0.0, rho), Complex64::new(0.0, -rho)];
    let points: Vec<Complex64> = grid
        .points(params)
        .into_iter()
        .filter(|z| poles.iter().all(|p| (z - p).norm() > STRIP_TIE_TOL))
        .collect();
    let gaps: Vec<(Complex64, f64)> = points
        .par_iter()
        .map(|&z| Ok((z, (forward_transform_measure(params, mu, SpectralPoint(z), quad)? - 1.0).norm())))
        .collect::<Result<_>>()?;
    let min_gap_off_rho = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let zero_candidates = gaps.iter().filter(|g| g.1 < GAP_THRESHOLD).map(|g| g.0).collect::<Vec<_>>();
    let irho = delta_irho(
        |x| Ok((1.0 - forward_transform_measure(params, mu, SpectralPoint::imag(x), quad)?).norm().ln()),
        0.0,
        rho,
        levels,
    )?;
    let unit_mass = (mass - 1.0).norm() < 1e-9;
    let atom0_not_one = (atom0 - 1.0).norm() > STRIP_TIE_TOL;
    let satisfied = unit_mass && atom0_not_one && zero_candidates.is_empty() && irho.value >= IRHO_FLOOR;
    Ok(MuConditions {
        mass,
        atom0,
        min_gap_off_rho,
        zero_candidates,
        irho,
        unit_mass,
        atom0_not_one,
        satisfied,
    })
}
