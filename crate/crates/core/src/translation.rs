//! Generalized translation `τ_s` and the convolutions built on it.
//!
//! ```text
//! τ_s f(t) = ∫∫ f(arccosh|cosh s cosh t + r e^{iψ} sinh s sinh t|) dm(r, ψ)
//! ```
//!
//! The kernel `dm` is a probability measure whose shape depends on the
//! parameter regime:
//!
//! * `α > β > -1/2`: density `∝ (1-r²)^{α-β-1} r^{2β+1} sin^{2β}ψ` on
//!   `[0,1]×[0,π]`;
//! * `α = β`: `r = 1` with density `∝ sin^{2α}ψ`;
//! * `β = -1/2`: `ψ ∈ {0, π}` with density `∝ (1-r²)^{α-1/2}` in `r`.
//!
//! All three reduce to Gauss-Jacobi rules. In the generic case the
//! substitution `u = r²` turns the `r`-density into the Jacobi weight
//! `(1-u)^{α-β-1} u^β`; `x = cos ψ` turns `sin^{2β}ψ dψ` into
//! `(1-x²)^{β-1/2} dx`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EvenFunction, GridFunction};
use crate::jacobi::log_delta;
use crate::measure::{panel_breaks, DensityReference, EvenMeasure};
use crate::params::{JacobiParams, SpectralPoint};
use crate::quadrature::{gauss_jacobi, integrate_over, QuadratureSpec};
use crate::transform::{forward_transform, Failure, Inverter};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Starting and maximal rule sizes of the adaptive translate.
const MIN_ORDER: usize = 16;
const MAX_ORDER: usize = 256;
/// Rule size used inside convolutions.
pub const CONVOLUTION_ORDER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelRegime {
    Generic,
    EqualParameters,
    HalfBeta,
}

impl KernelRegime {
    pub fn of(params: &JacobiParams) -> Self {
        if params.alpha() == params.beta() {
            KernelRegime::EqualParameters
        } else if params.beta() == -0.5 {
            KernelRegime::HalfBeta
        } else {
            KernelRegime::Generic
        }
    }
}

/// Product-rule nodes `(r·cos ψ, r², weight)` for the kernel, weights summing to 1.
#[derive(Debug, Clone)]
struct KernelRule {
    nodes: Vec<(f64, f64, f64)>,
}

fn normalized(rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let total: f64 = rule.iter().map(|p| p.1).sum();
    rule.iter().map(|&(x, w)| (x, w / total)).collect()
}

impl KernelRule {
    fn new(params: &JacobiParams, order: usize) -> Result<Self> {
        let (a, b) = (params.alpha(), params.beta());
        let nodes = match KernelRegime::of(params) {
            KernelRegime::Generic => {
                let radial = normalized(&gauss_jacobi(order, a - b - 1.0, b)?);
                let angular = normalized(&gauss_jacobi(order, b - 0.5, b - 0.5)?);
                let mut nodes = Vec::with_capacity(order * order);
                for &(xr, wr) in &radial {
                    let u = 0.5 * (1.0 + xr);
                    let r = u.sqrt();
                    for &(xc, wc) in &angular {
                        nodes.push((r * xc, u, wr * wc));
                    }
                }
                nodes
            }
            KernelRegime::EqualParameters => normalized(&gauss_jacobi(order, a - 0.5, a - 0.5)?)
                .into_iter()
                .map(|(x, w)| (x, 1.0, w))
                .collect(),
            KernelRegime::HalfBeta => normalized(&gauss_jacobi(order, a - 0.5, a - 0.5)?)
                .into_iter()
                .map(|(x, w)| (x, x * x, w))
                .collect(),
        };
        Ok(Self { nodes })
    }

    fn apply(&self, f: &(impl EvenFunction + ?Sized), s: f64, t: f64) -> Complex64 {
        let (ss, st) = (s.sinh(), t.sinh());
        let a = s.cosh() * t.cosh();
        let b = ss * st;
        // cosh²s cosh²t - 1 without cancellation
        let a2m1 = ss * ss + st * st + ss * ss * st * st;
        let mut acc = ZERO;
        for &(rc, r2, w) in &self.nodes {
            let x2m1 = (a2m1 + 2.0 * a * b * rc + r2 * b * b).max(0.0);
            acc += w * f.eval(x2m1.sqrt().asinh());
        }
        acc
    }
}

fn kernel_rule(params: &JacobiParams, order: usize) -> Result<Arc<KernelRule>> {
    use std::sync::LazyLock;
    use std::collections::HashMap;
    use std::sync::Mutex;
    type Key = (u64, u64, usize);
    static CACHE: LazyLock<Mutex<HashMap<Key, Arc<KernelRule>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
    let key = (params.alpha().to_bits(), params.beta().to_bits(), order);
    if let Some(r) = CACHE.lock().expect("poisoned").get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(KernelRule::new(params, order)?);
    CACHE.lock().expect("poisoned").insert(key, rule.clone());
    Ok(rule)
}

/// Absolute tolerance floor for translates of gridded functions, per `h⁴`;
/// near the cubic spline error constant 5/384.
const SAMPLED_FLOOR: f64 = 1e-2;

/// `τ_s f(t)`, requiring `|s| + |t| ≤ support(f)`.
pub fn translate(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    s: f64,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let (s, t) = (s.abs(), t.abs());
    if s + t > f.support() * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "translation needs |s| + |t| ≤ {} (got {})",
            f.support(),
            s + t
        )));
    }
    if s == 0.0 || t == 0.0 {
        return Ok(f.eval(s + t));
    }
    // A sampled function is only known to its interpolation accuracy.
    let floor = f.spacing().map_or(0.0, |h| SAMPLED_FLOOR * h.powi(4));
    let mut order = MIN_ORDER;
    let mut prev = kernel_rule(params, order)?.apply(f, s, t);
    loop {
        order *= 2;
        let next = kernel_rule(params, order)?.apply(f, s, t);
        let diff = (next - prev).norm();
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::precision("non-finite translate", f64::INFINITY));
        }
        if diff <= quad.abs_tol.max(floor).max(f64::EPSILON * 16.0 * next.norm()) {
            return Ok(next);
        }
        if order >= MAX_ORDER {
            return Err(Error::precision(
                format!("translate did not settle with {MAX_ORDER}-point rules"),
                diff,
            ));
        }
        prev = next;
    }
}

/// Fixed-order translate without the support check (compact-support
/// semantics: `f` is zero past its support).
pub(crate) fn translate_fixed(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    s: f64,
    t: f64,
    order: usize,
) -> Result<Complex64> {
    let (s, t) = (s.abs(), t.abs());
    if s == 0.0 || t == 0.0 {
        return Ok(f.eval(s + t));
    }
    Ok(kernel_rule(params, order)?.apply(f, s, t))
}

/// Output of a convolution: the samples plus the range on which they are
/// certified.
#[derive(Debug, Clone, PartialEq)]
pub struct Convolved {
    pub grid: GridFunction,
    pub valid_tmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionSidecar {
    pub valid_tmax: f64,
    pub tmax: f64,
    pub n: usize,
}

impl Convolved {
    pub fn sidecar(&self) -> ConvolutionSidecar {
        ConvolutionSidecar {
            valid_tmax: self.valid_tmax,
            tmax: self.grid.tmax(),
            n: self.grid.len(),
        }
    }
}

/// `(f ∗ g)(t) = 2 ∫₀^∞ τ_s f(t) g(s) Δ(s) ds` sampled on `n` points of
/// `[0, tmax]`. Both inputs are zero past their grids, so the result
/// vanishes beyond `f.tmax + g.tmax`.
pub fn convolve(
    params: &JacobiParams,
    f: &GridFunction,
    g: &GridFunction,
    tmax: f64,
    n: usize,
    quad: &QuadratureSpec,
) -> Result<Convolved> {
    let grid = GridFunction::par_try_from_fn(tmax, n, f.interpolation(), |t| {
        convolve_at(params, f, g, t, quad)
    })?;
    Ok(Convolved { grid, valid_tmax: tmax })
}

/// `(f ∗ g)(t)` at one point.
pub fn convolve_at(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    g: &(impl EvenFunction + ?Sized),
    t: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let failure = Failure::new();
    let integrand = |s: f64| {
        let gs = g.eval(s);
        if gs == ZERO || s == 0.0 {
            return ZERO;
        }
        2.0 * gs * log_delta(params, s).exp() * failure.catch(translate_fixed(params, f, s, t, CONVOLUTION_ORDER))
    };
    let upper = g.support().min(quad.tail_cutoff);
    let r = integrate_over(integrand, &panel_breaks(upper, g.spacing()), quad)?;
    failure.check()?;
    Ok(r.value)
}

/// `(f ∗ μ)(t) = ∫ τ_s f(t) dμ(s)` on the part of `f`'s grid where every
/// translate stays inside `[0, f.tmax]`.
pub fn convolve_measure(
    params: &JacobiParams,
    f: &GridFunction,
    mu: &EvenMeasure,
    quad: &QuadratureSpec,
) -> Result<Convolved> {
    let reach = mu.reach();
    let valid_tmax = f.tmax() - reach;
    let h = f.step();
    let count = if valid_tmax < 0.0 { 0 } else { (valid_tmax / h + 1e-9).floor() as usize + 1 };
    if count < crate::grid::MIN_SAMPLES {
        return Err(Error::domain(format!(
            "measure reach {reach} leaves {count} of {} samples (tmax = {})",
            f.len(),
            f.tmax()
        )));
    }
    let out_tmax = (count - 1) as f64 * h;
    let grid = GridFunction::par_try_from_fn(out_tmax, count, f.interpolation(), |t| {
        convolve_measure_at(params, f, mu, t, quad)
    })?;
    Ok(Convolved { grid, valid_tmax })
}

pub fn convolve_measure_at(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    mu: &EvenMeasure,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let mut acc = mu.atom0() * f.eval(t);
    for &(s, w) in mu.atoms() {
        acc += w * translate(params, f, s, t, quad)?;
    }
    if let Some(d) = mu.density() {
        let failure = Failure::new();
        let integrand = |s: f64| {
            let ds = d.grid.eval(s);
            if ds == ZERO || s == 0.0 {
                return ZERO;
            }
            let w = match d.reference {
                DensityReference::Lebesgue => 1.0,
                DensityReference::DeltaWeighted => log_delta(params, s).exp(),
            };
            2.0 * ds * w * failure.catch(translate_fixed(params, f, s, t, CONVOLUTION_ORDER))
        };
        let r = integrate_over(integrand, &panel_breaks(d.grid.tmax(), Some(d.grid.step())), quad)?;
        failure.check()?;
        acc += r.value;
    }
    Ok(acc)
}

/// `‖f‖₁ = 2 ∫₀^∞ |f| Δ`.
pub fn l1_norm(params: &JacobiParams, f: &(impl EvenFunction + ?Sized), quad: &QuadratureSpec) -> Result<f64> {
    let upper = f.support().min(quad.tail_cutoff);
    let integrand = |t: f64| {
        let v = f.eval(t).norm();
        if v == 0.0 || t == 0.0 {
            ZERO
        } else {
            Complex64::new(2.0 * v * log_delta(params, t).exp(), 0.0)
        }
    };
    Ok(integrate_over(integrand, &panel_breaks(upper, f.spacing()), quad)?.value.re)
}

/// `∫ f Δ`, which vanishes exactly on the augmentation ideal `L¹₀`.
pub fn l10_defect(params: &JacobiParams, f: &(impl EvenFunction + ?Sized), quad: &QuadratureSpec) -> Result<Complex64> {
    Ok(crate::transform::delta_pairing(params, f, |_| Ok(Complex64::new(1.0, 0.0)), quad)?.value)
}

/// Cross-check of `f ∗ g` through `(f̂ ĝ)ˇ`.
pub fn spectral_convolution(
    params: &JacobiParams,
    f: &(impl EvenFunction + ?Sized),
    g: &(impl EvenFunction + ?Sized),
    ts: &[f64],
    quad: &QuadratureSpec,
    lambda_max: f64,
) -> Result<Vec<Complex64>> {
    let inv = Inverter::new(params, lambda_max, 0.25, 16)?;
    let table = inv.tabulate(|l| {
        let x = SpectralPoint::real(l);
        Ok(forward_transform(params, f, x, quad)? * forward_transform(params, g, x, quad)?)
    })?;
    ts.par_iter().map(|&t| inv.invert(&table, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FnEven, Interpolation};
    use crate::jacobi::phi;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn kernel_is_a_probability_measure() {
        let one = FnEven::new(|_| c(1.0));
        let q = QuadratureSpec::default();
        for (a, b) in [(1.3, 0.2), (0.7, 0.7), (1.0, -0.5)] {
            let p = JacobiParams::new(a, b).unwrap();
            let v = translate(&p, &one, 0.8, 1.1, &q).unwrap();
            assert!((v - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn product_formula_closed_form_pair() {
        let p = JacobiParams::new(0.5, -0.5).unwrap();
        let l = SpectralPoint::real(2.0);
        let f = FnEven::new(|t| phi(&p, l, t).unwrap());
        let v = translate(&p, &f, 1.0, 1.0, &QuadratureSpec::with_tol(1e-10)).unwrap();
        let want = (2f64.sin() / (2.0 * 1f64.sinh())).powi(2);
        assert!((v.re - want).abs() < 1e-9);
        assert!((v.re - 0.149_668).abs() < 1e-6);
    }

    #[test]
    fn translate_by_zero_and_domain() {
        let p = JacobiParams::new(1.0, 0.0).unwrap();
        let g = GridFunction::from_fn(4.0, 401, Interpolation::Cubic, |t| c((-t * t).exp())).unwrap();
        let q = QuadratureSpec::default();
        assert_eq!(translate(&p, &g, 0.0, 1.3, &q).unwrap(), g.eval(1.3));
        assert!(matches!(translate(&p, &g, 2.5, 2.0, &q), Err(Error::Domain(_))));
    }

    #[test]
    fn l10_defect_of_constructed_member_vanishes() {
        let p = JacobiParams::new(1.0, 0.0).unwrap();
        let q = QuadratureSpec::with_tol(1e-12);
        let h1 = FnEven::with_support(|t| c((-t * t).exp()), 8.0);
        let h2 = FnEven::with_support(|t| c((-2.0 * t * t).exp()), 8.0);
        let k = l10_defect(&p, &h1, &q).unwrap() / l10_defect(&p, &h2, &q).unwrap();
        let f = FnEven::with_support(move |t| c((-t * t).exp()) - k * (-2.0 * t * t).exp(), 8.0);
        assert!(l10_defect(&p, &f, &q).unwrap().norm() < 1e-8);
        let via_transform = forward_transform(&p, &h1, SpectralPoint::imag(2.0), &q).unwrap();
        assert!((via_transform - l10_defect(&p, &h1, &q).unwrap()).norm() < 1e-8);
        let zero = FnEven::new(|_| ZERO);
        assert_eq!(l1_norm(&p, &zero, &q).unwrap(), 0.0);
    }
}
