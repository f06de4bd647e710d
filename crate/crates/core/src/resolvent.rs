//! Resolvent kernels `b_λ = i/(4λc(-λ)) Φ_λ` and the operators `T_λ` built
//! from them.
//!
//! `b_λ` is the even fundamental solution of `(L + λ² + ρ²) b = δ₀` with
//! `Im λ > 0`; it decays like `e^{-(Im λ + ρ)t}` and is singular at the
//! origin like `t^{-2α}` (logarithmically when `α = 0`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::EvenFunction;
use crate::jacobi::{ln_phi2, log_delta, phi, phi_second_kind, FD_STEP};
use crate::measure::panel_breaks;
use crate::params::{JacobiParams, SpectralPoint};
use crate::quadrature::{gauss_legendre, graded_breakpoints, integrate_over, legendre_tail_weights, QuadratureSpec};
use crate::special::log_gamma;
use crate::transform::{forward_transform, Failure, Inverter, SpectralEstimate};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Geometric levels used toward the singularity at the origin.
const ORIGIN_LEVELS: usize = 40;
/// Gauss-Legendre order per cell of a [`TLambdaProfile`] built from a closure.
const PROFILE_ORDER: usize = 16;
/// Order per grid interval when the function is sampled.
const PROFILE_GRID_ORDER: usize = 6;
const PROFILE_CELL: f64 = 0.25;

/// `b_λ` for a fixed `λ` with `Im λ > 0`.
#[derive(Debug, Clone, Copy)]
pub struct ResolventKernel {
    params: JacobiParams,
    lambda: Complex64,
    ln_prefactor: Complex64,
}

impl ResolventKernel {
    pub fn new(params: &JacobiParams, lambda: SpectralPoint) -> Result<Self> {
        let l = lambda.0;
        if !(l.im > 0.0) || !l.re.is_finite() {
            return Err(Error::domain(format!("b_λ needs Im λ > 0 (got λ = {l})")));
        }
        // ln c(-λ); no Γ below meets a pole when Im λ > 0.
        let (a, b, rho) = (params.alpha(), params.beta(), params.rho());
        let mil = -Complex64::i() * l;
        let tol = 1e-14;
        let ln_c = (rho - mil) * std::f64::consts::LN_2 + log_gamma(Complex64::new(a + 1.0, 0.0), tol)?
            + log_gamma(mil, tol)?
            - log_gamma((rho + mil) / 2.0, tol)?
            - log_gamma((mil + a - b + 1.0) / 2.0, tol)?;
        let ln_prefactor = (Complex64::i() / (4.0 * l)).ln() - ln_c;
        Ok(Self {
            params: *params,
            lambda: l,
            ln_prefactor,
        })
    }

    pub fn lambda(&self) -> SpectralPoint {
        SpectralPoint(self.lambda)
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    /// `ln b_λ(t)` (any branch of the imaginary part).
    pub fn ln_value(&self, t: f64) -> Result<Complex64> {
        let t = t.abs();
        if t == 0.0 {
            return Err(Error::domain("b_λ is singular at t = 0"));
        }
        Ok(self.ln_prefactor + ln_phi2(&self.params, self.lambda, t)?)
    }

    pub fn value(&self, t: f64) -> Result<Complex64> {
        Ok(self.ln_value(t)?.exp())
    }

    /// `b_λ(t) Δ(t)`, formed in log space.
    pub fn value_times_delta(&self, t: f64) -> Result<Complex64> {
        Ok((self.ln_value(t)? + log_delta(&self.params, t)).exp())
    }
}

/// `b_λ(t)`.
pub fn b_lambda(params: &JacobiParams, lambda: SpectralPoint, t: f64) -> Result<Complex64> {
    ResolventKernel::new(params, lambda)?.value(t)
}

/// `2 ∫₀^∞ h(t, b_λ(t)Δ(t)) dt` on a mesh graded toward 0 and cut where
/// `e^{-rate·t}` has fallen below the tolerance.
pub(crate) fn kernel_integral(
    kernel: &ResolventKernel,
    rate: f64,
    quad: &QuadratureSpec,
    h: impl Fn(f64, Complex64) -> Result<Complex64> + Sync,
) -> Result<SpectralEstimate> {
    let head = 0.5;
    let cutoff = (head + ((1.0 / quad.abs_tol).ln() + 10.0) / rate).min(quad.tail_cutoff);
    let mut bps = graded_breakpoints(head, 0.5, ORIGIN_LEVELS);
    let mut x = head;
    while x < cutoff {
        x = (x + 1.0).min(cutoff);
        bps.push(x);
    }
    let failure = Failure::new();
    let integrand = |t: f64| {
        if t == 0.0 {
            return ZERO;
        }
        let bd = failure.catch(kernel.value_times_delta(t));
        2.0 * failure.catch(h(t, bd))
    };
    let r = integrate_over(integrand, &bps, quad)?;
    let edge = integrand(cutoff).norm();
    failure.check()?;
    Ok(SpectralEstimate {
        value: r.value,
        error: r.error,
        tail_bound: edge / rate,
    })
}

fn require_integrable(params: &JacobiParams, lambda: SpectralPoint) -> Result<f64> {
    let rate = lambda.0.im - params.rho();
    if !(rate > 0.0) {
        return Err(Error::domain(format!(
            "b_λ is not integrable for Im λ = {} ≤ ρ = {}",
            lambda.0.im,
            params.rho()
        )));
    }
    Ok(rate)
}

/// `b̂_λ(ξ)` for `Im λ > ρ` and `ξ` in the strip; equals `1/(ξ² - λ²)`.
pub fn b_hat(
    params: &JacobiParams,
    lambda: SpectralPoint,
    xi: SpectralPoint,
    quad: &QuadratureSpec,
) -> Result<SpectralEstimate> {
    require_integrable(params, lambda)?;
    if !xi.in_strip(params) {
        return Err(Error::domain(format!("ξ = {} lies outside the strip", xi.0)));
    }
    let kernel = ResolventKernel::new(params, lambda)?;
    let rate = lambda.0.im - xi.0.im.abs();
    kernel_integral(&kernel, rate, quad, |t, bd| Ok(bd * phi(params, xi, t)?))
}

/// `‖b_λ‖₁` for `Im λ > ρ`.
pub fn b_l1_norm(params: &JacobiParams, lambda: SpectralPoint, quad: &QuadratureSpec) -> Result<SpectralEstimate> {
    let rate = require_integrable(params, lambda)?;
    let kernel = ResolventKernel::new(params, lambda)?;
    kernel_integral(&kernel, rate, quad, |_, bd| Ok(Complex64::new(bd.norm(), 0.0)))
}

/// Fourth-order central difference, refined once by Richardson extrapolation.
fn derivative(g: impl Fn(f64) -> Result<Complex64>, t: f64, h: f64) -> Result<Complex64> {
    let d = |h: f64| -> Result<Complex64> {
        Ok((g(t - 2.0 * h)? - 8.0 * g(t - h)? + 8.0 * g(t + h)? - g(t + 2.0 * h)?) / (12.0 * h))
    };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((16.0 * fine - coarse) / 15.0)
}

/// `Δ(t)(φ_λ Φ'_λ - φ'_λ Φ_λ)(t)`, which is constant in `t` and equal to
/// `2iλ c(-λ)`.
pub fn wronskian_bracket(params: &JacobiParams, lambda: SpectralPoint, t: f64) -> Result<Complex64> {
    if !(t > 2.0 * FD_STEP) {
        return Err(Error::domain(format!("the bracket needs t > {} (got {t})", 2.0 * FD_STEP)));
    }
    let p = |s| phi(params, lambda, s);
    let q = |s| phi_second_kind(params, lambda, s);
    let dp = derivative(p, t, FD_STEP)?;
    let dq = derivative(q, t, FD_STEP)?;
    let w = p(t)? * dq - dp * q(t)?;
    Ok(w * log_delta(params, t).exp())
}

fn require_kernel_args(params: &JacobiParams, f: &(impl EvenFunction + ?Sized), lambda: SpectralPoint) -> Result<f64> {
    let support = f.support();
    if !support.is_finite() {
        return Err(Error::domain("T_λ is implemented for compactly supported f"));
    }
    ResolventKernel::new(params, lambda)?;
    Ok(support)
}

/// `T_λf(t) = f̂(λ)b_λ(t) - (f * b_λ)(t)`, evaluated through the
/// equivalent one-dimensional form
/// `2b_λ(t)∫_t^∞ fφ_λΔ - 2φ_λ(t)∫_t^∞ f b_λ Δ`.
pub fn t_lambda(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    lambda: SpectralPoint,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let support = require_kernel_args(params, f, lambda)?;
    let kernel = ResolventKernel::new(params, lambda)?;
    let t = t.abs();
    if t == 0.0 {
        return Err(Error::domain("T_λf is singular at t = 0"));
    }
    if t >= support {
        return Ok(ZERO);
    }
    let mut bps = vec![t];
    bps.extend(panel_breaks(support, f.spacing()).into_iter().filter(|&x| x > t));
    let failure = Failure::new();
    let with_phi = integrate_over(
        |s| f.eval(s) * failure.catch(phi(params, lambda, s)) * log_delta(params, s).exp(),
        &bps,
        quad,
    )?;
    let with_b = integrate_over(|s| f.eval(s) * failure.catch(kernel.value_times_delta(s)), &bps, quad)?;
    failure.check()?;
    Ok(2.0 * (kernel.value(t)? * with_phi.value - phi(params, lambda, t)? * with_b.value))
}

/// The same quantity computed on the spectral side:
/// `f̂(λ)b_λ(t) - 𝓕⁻¹[f̂(ξ)/(ξ² - λ²)](t)`.
pub fn t_lambda_spectral(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    lambda: SpectralPoint,
    ts: &[f64],
    quad: &QuadratureSpec,
    lambda_max: f64,
) -> Result<Vec<Complex64>> {
    require_kernel_args(params, f, lambda)?;
    let kernel = ResolventKernel::new(params, lambda)?;
    let fl = forward_transform(params, f, lambda, quad)?;
    let inv = Inverter::new(params, lambda_max, 0.25, 16)?;
    let l2 = lambda.0 * lambda.0;
    let table = inv.tabulate(|x| Ok(forward_transform(params, f, SpectralPoint::real(x), quad)? / (x * x - l2)))?;
    ts.iter()
        .map(|&t| Ok(fl * kernel.value(t)? - inv.invert(&table, t)?))
        .collect()
}

#[derive(Debug, Clone)]
struct Cell {
    a: f64,
    b: f64,
    order: usize,
    /// `fφ_λΔ` and `f b_λ Δ` at the cell nodes.
    with_phi: Vec<Complex64>,
    with_b: Vec<Complex64>,
    /// Both integrals over `[b, support]`.
    tail_phi: Complex64,
    tail_b: Complex64,
}

impl Cell {
    fn half(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    fn node(&self, x: f64) -> f64 {
        0.5 * (self.a + self.b) + self.half() * x
    }

    /// Integrals over `[t, support]` for `t` inside the cell.
    fn tails_from(&self, t: f64) -> (Complex64, Complex64) {
        self.tails_at(((t - self.a) / self.half() - 1.0).clamp(-1.0, 1.0))
    }

    /// As [`Cell::tails_from`], at local coordinate `x ∈ [-1, 1]`.
    fn tails_at(&self, x: f64) -> (Complex64, Complex64) {
        let v = legendre_tail_weights(self.order, x);
        let mut p = self.tail_phi;
        let mut q = self.tail_b;
        for ((wp, wb), vj) in self.with_phi.iter().zip(&self.with_b).zip(&v) {
            p += wp * vj * self.half();
            q += wb * vj * self.half();
        }
        (p, q)
    }
}

/// `T_λf` tabulated at Gauss nodes over the support of `f`, so that its
/// transform, norm and pairings cost one sum each.
#[derive(Debug, Clone)]
pub struct TLambdaProfile {
    params: JacobiParams,
    lambda: SpectralPoint,
    support: f64,
    cells: Vec<Cell>,
    /// `(t, 2·weight·Δ(t), T_λf(t))`.
    samples: Vec<(f64, f64, Complex64)>,
}

impl TLambdaProfile {
    pub fn new(params: &JacobiParams, f: &(impl EvenFunction + ?Sized), lambda: SpectralPoint) -> Result<Self> {
        let support = require_kernel_args(params, f, lambda)?;
        let kernel = ResolventKernel::new(params, lambda)?;
        let (edges, order) = profile_edges(support, f.spacing());
        let rule = gauss_legendre(order);
        let mut cells = Vec::with_capacity(edges.len());
        for w in edges.windows(2) {
            let mut cell = Cell {
                a: w[0],
                b: w[1],
                order,
                with_phi: Vec::with_capacity(order),
                with_b: Vec::with_capacity(order),
                tail_phi: ZERO,
                tail_b: ZERO,
            };
            for &(x, _) in rule.iter() {
                let t = cell.node(x);
                let fv = f.eval(t);
                cell.with_phi.push(fv * phi(params, lambda, t)? * log_delta(params, t).exp());
                cell.with_b.push(fv * kernel.value_times_delta(t)?);
            }
            cells.push(cell);
        }
        let (mut acc_phi, mut acc_b) = (ZERO, ZERO);
        for cell in cells.iter_mut().rev() {
            cell.tail_phi = acc_phi;
            cell.tail_b = acc_b;
            for (j, &(_, w)) in rule.iter().enumerate() {
                acc_phi += cell.with_phi[j] * w * cell.half();
                acc_b += cell.with_b[j] * w * cell.half();
            }
        }
        let mut samples = Vec::with_capacity(cells.len() * order);
        for cell in &cells {
            for &(x, w) in rule.iter() {
                let t = cell.node(x);
                let (p, q) = cell.tails_at(x);
                let value = 2.0 * (kernel.value(t)? * p - phi(params, lambda, t)? * q);
                samples.push((t, 2.0 * w * cell.half() * log_delta(params, t).exp(), value));
            }
        }
        Ok(Self {
            params: *params,
            lambda,
            support,
            cells,
            samples,
        })
    }

    pub fn lambda(&self) -> SpectralPoint {
        self.lambda
    }

    /// `T_λf(t)`; zero beyond the support of `f`.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let t = t.abs();
        if t == 0.0 {
            return Err(Error::domain("T_λf is singular at t = 0"));
        }
        if t >= self.support {
            return Ok(ZERO);
        }
        let i = self.cells.partition_point(|c| c.b <= t).min(self.cells.len() - 1);
        let (p, q) = self.cells[i].tails_from(t);
        let kernel = ResolventKernel::new(&self.params, self.lambda)?;
        Ok(2.0 * (kernel.value(t)? * p - phi(&self.params, self.lambda, t)? * q))
    }

    /// `2∫₀^∞ T_λf · g · Δ`.
    pub fn pair(&self, g: impl Fn(f64) -> Result<Complex64>) -> Result<Complex64> {
        let mut acc = ZERO;
        for &(t, w, v) in &self.samples {
            acc += w * v * g(t)?;
        }
        Ok(acc)
    }

    /// `(T_λf)^(ξ)`, which equals `(f̂(λ) - f̂(ξ))/(ξ² - λ²)`.
    pub fn transform(&self, xi: SpectralPoint) -> Result<Complex64> {
        self.pair(|t| phi(&self.params, xi, t))
    }

    pub fn l1_norm(&self) -> f64 {
        self.samples.iter().map(|&(_, w, v)| w * v.norm()).sum()
    }

    /// Nodes and values.
    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.samples.iter().map(|&(t, _, v)| (t, v))
    }
}

fn profile_edges(support: f64, spacing: Option<f64>) -> (Vec<f64>, usize) {
    match spacing {
        Some(h) => {
            // One cell per grid interval so the spline is smooth on each.
            let head = (h * (0.5 / h).round().max(1.0)).min(support);
            let mut edges = graded_breakpoints(head.min(h), 0.5, ORIGIN_LEVELS);
            let mut k = 1usize;
            while (k as f64) * h < support - 1e-12 * support {
                k += 1;
                edges.push(((k as f64) * h).min(support));
            }
            edges.dedup();
            (edges, PROFILE_GRID_ORDER)
        }
        None => {
            let head = support.min(0.5);
            let mut edges = graded_breakpoints(head, 0.5, ORIGIN_LEVELS);
            let mut x = head;
            while x < support {
                x = (x + PROFILE_CELL).min(support);
                edges.push(x);
            }
            (edges, PROFILE_ORDER)
        }
    }
}

/// Observed growth of `‖T_λf‖₁` against the distance to the strip edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthDiagnostic {
    pub lambdas: Vec<Complex64>,
    /// `‖T_λf‖₁ · (ρ - |Im λ|) / ‖f‖₁`.
    pub ratios: Vec<f64>,
    /// Smallest `L ≤ 12` with `ratio/(1 + |λ|)^L` no larger than at the
    /// first sample; `None` if the data grow faster.
    pub exponent: Option<u32>,
}

pub const MAX_GROWTH_EXPONENT: u32 = 12;

pub fn t_lambda_growth(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    lambdas: &[SpectralPoint],
    quad: &QuadratureSpec,
) -> Result<GrowthDiagnostic> {
    let norm_f = crate::translation::l1_norm(params, f, quad)?;
    if norm_f == 0.0 {
        return Err(Error::Invalid("f must be non-zero".into()));
    }
    let mut ratios = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let gap = params.rho() - l.0.im.abs();
        if !(gap > 0.0) {
            return Err(Error::domain(format!("λ = {} is not inside the strip", l.0)));
        }
        let profile = TLambdaProfile::new(params, f, l)?;
        ratios.push(profile.l1_norm() * gap / norm_f);
    }
    let lambdas: Vec<Complex64> = lambdas.iter().map(|l| l.0).collect();
    let exponent = fit_exponent(&lambdas, &ratios);
    Ok(GrowthDiagnostic {
        lambdas,
        ratios,
        exponent,
    })
}

/// Smallest `L ≤ MAX_GROWTH_EXPONENT` for which `ratio/(1 + |λ|)^L` never
/// exceeds its value at the first sample.
pub(crate) fn fit_exponent(lambdas: &[Complex64], ratios: &[f64]) -> Option<u32> {
    (0..=MAX_GROWTH_EXPONENT).find(|&k| {
        let scaled: Vec<f64> = lambdas
            .iter()
            .zip(ratios)
            .map(|(l, r)| r / (1.0 + l.norm()).powi(k as i32))
            .collect();
        scaled.first().is_none_or(|&s0| scaled.iter().all(|&s| s <= s0 * (1.0 + 1e-9)))
    })
}
