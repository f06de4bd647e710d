//! Forward and inverse Fourier-Jacobi transforms.
//!
//! ```text
//! f̂(λ) = 2 ∫₀^∞ f(t) φ_λ(t) Δ(t) dt
//! f(t) = (1/4π) ∫₀^∞ f̂(λ) φ_λ(t) |c(λ)|^{-2} dλ
//! ```

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::EvenFunction;
use crate::jacobi::{log_delta, phi, plancherel_density};
use crate::measure::{panel_breaks, EvenMeasure};
use crate::params::{JacobiParams, SpectralPoint};
use crate::quadrature::{gauss_legendre, integrate_over, QuadratureSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default truncation of the inversion integral.
pub const DEFAULT_LAMBDA_MAX: f64 = 40.0;

/// A quadrature value with its error accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: Complex64,
    /// Estimated quadrature error.
    pub error: f64,
    /// Bound on the truncated tail, when one applies.
    pub tail_bound: f64,
}

/// Collects the first error raised inside an infallible integrand.
pub(crate) struct Failure(Mutex<Option<Error>>);

impl Failure {
    pub(crate) fn new() -> Self {
        Self(Mutex::new(None))
    }

    pub(crate) fn catch(&self, r: Result<Complex64>) -> Complex64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.lock().expect("poisoned").get_or_insert(e);
                ZERO
            }
        }
    }

    pub(crate) fn check(self) -> Result<()> {
        match self.0.into_inner().expect("poisoned") {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// `2 ∫₀^{upper} f(t) k(t) Δ(t) dt` with `upper` the support of `f`
/// (clipped at the tail cutoff).
pub(crate) fn delta_pairing(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    kernel: impl Fn(f64) -> Result<Complex64> + Sync,
    quad: &QuadratureSpec,
) -> Result<SpectralEstimate> {
    let upper = f.support().min(quad.tail_cutoff);
    let failure = Failure::new();
    let integrand = |t: f64| {
        let v = f.eval(t);
        if v == ZERO || t == 0.0 {
            return ZERO;
        }
        2.0 * v * log_delta(params, t).exp() * failure.catch(kernel(t))
    };
    let r = integrate_over(integrand, &panel_breaks(upper, f.spacing()), quad)?;
    failure.check()?;
    Ok(SpectralEstimate {
        value: r.value,
        error: r.error,
        tail_bound: 0.0,
    })
}

/// `f̂(λ)` for `λ` in the closed strip.
pub fn forward_transform(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    lambda: SpectralPoint,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    Ok(forward_transform_estimate(params, f, lambda, quad)?.value)
}

pub fn forward_transform_estimate(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    lambda: SpectralPoint,
    quad: &QuadratureSpec,
) -> Result<SpectralEstimate> {
    if !lambda.in_strip(params) {
        return Err(Error::domain(format!(
            "uncertified region: λ = {} lies outside the strip |Im λ| ≤ {}",
            lambda.0,
            params.rho()
        )));
    }
    delta_pairing(params, f, |t| phi(params, lambda, t), quad)
}

/// `μ̂(λ) = ∫ φ_λ dμ`.
pub fn forward_transform_measure(
    params: &JacobiParams,
    mu: &EvenMeasure,
    lambda: SpectralPoint,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    if !lambda.in_strip(params) {
        return Err(Error::domain(format!(
            "uncertified region: λ = {} lies outside the strip |Im λ| ≤ {}",
            lambda.0,
            params.rho()
        )));
    }
    mu.integrate_even(params, |t| phi(params, lambda, t), quad)
}

/// Dyadic breakpoints `0, 1, 2, 4, …, λ_max`.
fn dyadic_breaks(lambda_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = 1.0f64.min(lambda_max);
    pts.push(x);
    while x < lambda_max {
        x = (2.0 * x).min(lambda_max);
        pts.push(x);
    }
    pts
}

/// `(1/4π) ∫₀^{λ_max} f̂(λ) φ_λ(t) |c(λ)|^{-2} dλ`; the tail bound is the
/// magnitude of the last dyadic block.
pub fn inverse_transform(
    params: &JacobiParams,
    fhat: impl Fn(f64) -> Result<Complex64> + Sync,
    t: f64,
    quad: &QuadratureSpec,
    lambda_max: f64,
) -> Result<SpectralEstimate> {
    if !(lambda_max > 0.0) {
        return Err(Error::Invalid("lambda_max must be positive".into()));
    }
    let failure = Failure::new();
    let integrand = |l: f64| {
        if l == 0.0 {
            return ZERO;
        }
        let r = (|| -> Result<Complex64> {
            let w = plancherel_density(params, l)?;
            Ok(fhat(l)? * phi(params, SpectralPoint::real(l), t)? * w)
        })();
        failure.catch(r) / (4.0 * PI)
    };
    let bps = dyadic_breaks(lambda_max);
    let total = integrate_over(integrand, &bps, quad)?;
    let n = bps.len();
    let tail = if n >= 3 {
        integrate_over(integrand, &bps[n - 2..], quad)?.value.norm()
    } else {
        total.value.norm()
    };
    failure.check()?;
    Ok(SpectralEstimate {
        value: total.value,
        error: total.error,
        tail_bound: tail,
    })
}

/// Fixed composite Gauss-Legendre rule on `[0, λ_max]` carrying the
/// Plancherel weight, for inverting many points from one table of `f̂`.
#[derive(Debug, Clone)]
pub struct Inverter {
    params: JacobiParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Inverter {
    pub fn new(params: &JacobiParams, lambda_max: f64, panel_width: f64, order: usize) -> Result<Self> {
        if !(lambda_max > 0.0 && panel_width > 0.0) {
            return Err(Error::Invalid("inversion range and panel width must be positive".into()));
        }
        let panels = (lambda_max / panel_width).ceil() as usize;
        let h = lambda_max / panels as f64;
        let rule = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for &(x, w) in rule.iter() {
                let l = mid + 0.5 * h * x;
                nodes.push(l);
                weights.push(0.5 * h * w * plancherel_density(params, l)? / (4.0 * PI));
            }
        }
        Ok(Self {
            params: *params,
            nodes,
            weights,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `f̂` at every node, in parallel.
    pub fn tabulate(&self, fhat: impl Fn(f64) -> Result<Complex64> + Sync) -> Result<Vec<Complex64>> {
        self.nodes.par_iter().map(|&l| fhat(l)).collect()
    }

    /// Invert a table produced by [`Inverter::tabulate`] at `t`.
    pub fn invert(&self, table: &[Complex64], t: f64) -> Result<Complex64> {
        if table.len() != self.nodes.len() {
            return Err(Error::Invalid("spectral table does not match the rule".into()));
        }
        let mut acc = ZERO;
        for ((&l, &w), &v) in self.nodes.iter().zip(&self.weights).zip(table) {
            acc += v * phi(&self.params, SpectralPoint::real(l), t)? * w;
        }
        Ok(acc)
    }
}

/// Magnitudes along a growing real `λ` sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannLebesgueReport {
    pub lambdas: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub strictly_decreasing: bool,
}

impl RiemannLebesgueReport {
    fn from_pairs(lambdas: &[f64], magnitudes: Vec<f64>) -> Self {
        let strictly_decreasing = magnitudes.windows(2).all(|w| w[1] < w[0]);
        Self {
            lambdas: lambdas.to_vec(),
            magnitudes,
            strictly_decreasing,
        }
    }

    /// Strict decrease over the entries with `λ ≥ from`.
    pub fn decreasing_from(&self, from: f64) -> bool {
        let tail: Vec<f64> = self
            .lambdas
            .iter()
            .zip(&self.magnitudes)
            .filter(|(&l, _)| l >= from)
            .map(|(_, &m)| m)
            .collect();
        tail.windows(2).all(|w| w[1] < w[0])
    }
}

fn check_sequence(lambdas: &[f64]) -> Result<()> {
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("λ sequence must be increasing".into()));
    }
    Ok(())
}

/// `|f̂(λ_k)|` along an increasing real sequence.
pub fn riemann_lebesgue_check(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    lambdas: &[f64],
    quad: &QuadratureSpec,
) -> Result<RiemannLebesgueReport> {
    check_sequence(lambdas)?;
    let mags = lambdas
        .iter()
        .map(|&l| Ok(forward_transform(params, f, SpectralPoint::real(l), quad)?.norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RiemannLebesgueReport::from_pairs(lambdas, mags))
}

/// `|μ̂(λ_k) - μ({0})|` along an increasing real sequence.
pub fn riemann_lebesgue_check_measure(
    params: &JacobiParams,
    mu: &EvenMeasure,
    lambdas: &[f64],
    quad: &QuadratureSpec,
) -> Result<RiemannLebesgueReport> {
    check_sequence(lambdas)?;
    let mags = lambdas
        .iter()
        .map(|&l| {
            let v = forward_transform_measure(params, mu, SpectralPoint::real(l), quad)?;
            Ok((v - mu.atom0()).norm())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RiemannLebesgueReport::from_pairs(lambdas, mags))
}
