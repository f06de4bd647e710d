//! Numerical companions to the Wiener-Tauberian statement: decay indicators,
//! common-zero scans over the strip, the resolvent transform of a bounded
//! function and a least-squares demonstration that the kernels `b_λ` span a
//! dense subspace.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::EvenFunction;
use crate::jacobi::log_delta;
use crate::params::{JacobiParams, SpectralPoint, STRIP_TIE_TOL};
use crate::quadrature::{gauss_legendre, QuadratureSpec};
use crate::resolvent::{fit_exponent, kernel_integral, ResolventKernel, TLambdaProfile};
use crate::transform::forward_transform;

/// Transforms whose modulus falls below this are not divided by.
pub const DIVISION_FLOOR: f64 = 1e-10;
/// Sequence points entering the `δ_{iρ}` estimate.
pub const IRHO_WINDOW: usize = 5;
/// Refinement rounds of the zero scan.
pub const SCAN_ROUNDS: usize = 3;

/// A windowed estimate of a `lim sup`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub value: f64,
    /// The range of `t` (or of `x`) that entered the estimate.
    pub window: (f64, f64),
}

/// `δ∞⁺(F) = -lim sup e^{-πt/(2ρ)} log|F(t)|`, estimated as the maximum over
/// `[T/2, T]` with `T` the last sample.
///
/// `samples` holds `(t, log|F(t)|)` on an increasing grid; `-∞` is allowed.
pub fn delta_inf_plus(samples: &[(f64, f64)], rho: f64) -> Result<DecayEstimate> {
    let horizon = samples
        .last()
        .map(|s| s.0)
        .ok_or_else(|| Error::domain("no samples"))?;
    let from = horizon / 2.0;
    let sup = samples
        .iter()
        .filter(|s| s.0 >= from)
        .map(|&(t, ln_f)| (-PI * t / (2.0 * rho)).exp() * ln_f)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    match sup {
        Some(v) => Ok(DecayEstimate {
            value: -v,
            window: (from, horizon),
        }),
        None => Err(Error::domain("empty tail window")),
    }
}

/// `δ_{iρ}(F) = lim sup_{x→ρ-} (ρ - x) log|F(ix)|`, estimated on
/// `x_k = ρ - 2^{-k}(ρ - x₀)`, `k ≤ levels`, as the maximum over the last
/// five points. `ln_abs(x)` returns `log|F(ix)|`.
pub fn delta_irho(ln_abs: impl Fn(f64) -> Result<f64>, x0: f64, rho: f64, levels: usize) -> Result<DecayEstimate> {
    if !(x0 < rho) || levels + 1 < IRHO_WINDOW {
        return Err(Error::domain(format!(
            "need x0 < ρ and at least {} levels",
            IRHO_WINDOW - 1
        )));
    }
    let xs: Vec<f64> = (levels + 1 - IRHO_WINDOW..=levels)
        .map(|k| rho - (rho - x0) * 0.5f64.powi(k as i32))
        .collect();
    let mut best = f64::NEG_INFINITY;
    for &x in &xs {
        best = best.max((rho - x) * ln_abs(x)?);
    }
    Ok(DecayEstimate {
        value: best,
        window: (xs[0], xs[xs.len() - 1]),
    })
}

/// Rectangular sample of the strip `|Im λ| ≤ ρ`: `2·re_n + 1` columns on
/// `[-re_max, re_max]`, `2·im_n + 1` rows on `|Im λ| ≤ ρ - im_margin`, plus
/// the two boundary rails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripScanGrid {
    pub re_max: f64,
    pub re_n: usize,
    pub im_margin: f64,
    pub im_n: usize,
}

impl StripScanGrid {
    pub fn validate(&self, params: &JacobiParams) -> Result<()> {
        if !(self.re_max > 0.0) || self.re_n == 0 || self.im_n == 0 {
            return Err(Error::Invalid("scan grid needs re_max > 0 and non-empty axes".into()));
        }
        if !(self.im_margin >= 0.0 && self.im_margin < params.rho()) {
            return Err(Error::Invalid(format!(
                "im_margin must lie in [0, ρ) = [0, {})",
                params.rho()
            )));
        }
        Ok(())
    }

    /// Centres of all cells.
    pub fn points(&self, params: &JacobiParams) -> Vec<Complex64> {
        self.cells(params.rho()).into_iter().map(|c| c.centre).collect()
    }

    /// Cells as `(centre, half-width in Re, half-width in Im)`.
    fn cells(&self, rho: f64) -> Vec<ScanCell> {
        let dx = self.re_max / self.re_n as f64;
        let top = rho - self.im_margin;
        let dy = top / self.im_n as f64;
        let n = self.re_n as i64;
        let m = self.im_n as i64;
        let mut rows: Vec<(f64, f64)> = (-m..=m).map(|j| (j as f64 * dy, dy / 2.0)).collect();
        if self.im_margin > 0.0 {
            rows.push((rho, dy / 2.0));
            rows.push((-rho, dy / 2.0));
        }
        let mut out = Vec::with_capacity(rows.len() * (2 * self.re_n + 1));
        for &(y, hy) in &rows {
            for i in -n..=n {
                out.push(ScanCell {
                    centre: Complex64::new(i as f64 * dx, y),
                    half_re: dx / 2.0,
                    half_im: hy,
                    value: f64::NAN,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub centre: Complex64,
    pub half_re: f64,
    pub half_im: f64,
    /// `max_ν |f̂_ν|` at the centre.
    pub value: f64,
}

impl ScanCell {
    fn contains(&self, z: Complex64) -> bool {
        (z.re - self.centre.re).abs() <= self.half_re && (z.im - self.centre.im).abs() <= self.half_im
    }

    fn split(&self, rho: f64) -> Vec<ScanCell> {
        let (hr, hi) = (self.half_re / 2.0, self.half_im / 2.0);
        let mut out = Vec::with_capacity(4);
        for (sr, si) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            let mut c = self.centre + Complex64::new(sr * hr, si * hi);
            // Keep the sample inside the closed strip.
            c.im = c.im.clamp(-rho, rho);
            out.push(ScanCell {
                centre: c,
                half_re: hr,
                half_im: hi,
                value: f64::NAN,
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub threshold: f64,
    pub cells: Vec<ScanCell>,
    /// Every candidate cell contains `iρ` or `-iρ` (vacuously true when
    /// there are none).
    pub only_rho_candidates: bool,
}

/// A family of transforms evaluated at a spectral point.
pub type SpectralMap<'a> = &'a (dyn Fn(SpectralPoint) -> Result<Complex64> + Sync);

fn family_max(family: &[SpectralMap<'_>], z: Complex64) -> Result<f64> {
    let mut m = 0.0f64;
    for f in family {
        m = m.max(f(SpectralPoint(z))?.norm());
    }
    Ok(m)
}

/// Cells of the strip where every member of `family` is below `threshold`
/// in modulus, refined by repeated 2×2 subdivision.
pub fn scan_common_zeros(
    params: &JacobiParams,
    family: &[SpectralMap<'_>],
    grid: &StripScanGrid,
    threshold: f64,
) -> Result<ScanReport> {
    grid.validate(params)?;
    if family.is_empty() {
        return Err(Error::Invalid("empty family".into()));
    }
    let rho = params.rho();
    let evaluate = |cells: Vec<ScanCell>| -> Result<Vec<ScanCell>> {
        cells
            .into_par_iter()
            .map(|mut c| {
                c.value = family_max(family, c.centre)?;
                Ok(c)
            })
            .collect()
    };
    let mut flagged: Vec<ScanCell> = evaluate(grid.cells(rho))?
        .into_iter()
        .filter(|c| c.value < threshold)
        .collect();
    for _ in 0..SCAN_ROUNDS {
        let mut next = Vec::new();
        for cell in &flagged {
            let mut kids = evaluate(cell.split(rho))?;
            kids.retain(|k| k.value < threshold);
            if kids.is_empty() {
                // The minimum may sit between sub-centres; keep the parent.
                next.push(*cell);
            } else {
                next.extend(kids);
            }
        }
        flagged = next;
    }
    let poles = [Complex64::new(0.0, rho), Complex64::new(0.0, -rho)];
    let only_rho_candidates = flagged
        .iter()
        .all(|c| poles.iter().any(|&p| c.contains(p) || (c.centre - p).norm() < STRIP_TIE_TOL));
    Ok(ScanReport {
        threshold,
        cells: flagged,
        only_rho_candidates,
    })
}

/// The resolvent transform of a bounded even `g` with respect to the ideal
/// generated by `f`:
///
/// * `⟨b_λ, g⟩` for `|Im λ| > ρ`;
/// * `⟨T_λf, g⟩ / f̂(λ)` for `0 < |Im λ| < ρ`;
///
/// where `⟨h, g⟩ = ∫ h g Δ`. Both branches are even in `λ`.
pub fn resolvent_transform(
    params: &JacobiParams,
    g: &(impl EvenFunction + ?Sized),
    f: &(impl EvenFunction + ?Sized),
    lambda: SpectralPoint,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let rho = params.rho();
    let l = if lambda.0.im < 0.0 { -lambda } else { lambda };
    let y = l.0.im;
    if (y - rho).abs() <= STRIP_TIE_TOL || y == 0.0 {
        return Err(Error::domain(format!(
            "no branch of the resolvent transform at λ = {}",
            lambda.0
        )));
    }
    if y > rho {
        let kernel = ResolventKernel::new(params, l)?;
        let v = kernel_integral(&kernel, y - rho, quad, |t, bd| Ok(bd * g.eval(t)))?;
        return Ok(v.value);
    }
    let fl = forward_transform(params, f, l, quad)?;
    if fl.norm() < DIVISION_FLOOR {
        return Err(Error::DivisionUnstable(format!(
            "|f̂(λ)| = {:.3e} at λ = {}",
            fl.norm(),
            l.0
        )));
    }
    let profile = TLambdaProfile::new(params, f, l)?;
    Ok(profile.pair(|t| Ok(g.eval(t)))? / fl)
}

/// Fit of both branches to `-a/(λ² + ρ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueReport {
    /// Least-squares `a` from the exterior samples.
    pub a: Complex64,
    pub exterior_fit_error: f64,
    /// Largest deviation of the interior branch from the fitted function.
    pub interior_deviation: f64,
}

pub fn resolvent_glue(
    params: &JacobiParams,
    g: &(impl EvenFunction + ?Sized),
    f: &(impl EvenFunction + ?Sized),
    exterior: &[SpectralPoint],
    interior: &[SpectralPoint],
    quad: &QuadratureSpec,
) -> Result<GlueReport> {
    if exterior.is_empty() {
        return Err(Error::Invalid("need exterior samples".into()));
    }
    let rho2 = params.rho() * params.rho();
    let shape = |l: SpectralPoint| -1.0 / (l.0 * l.0 + rho2);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    let mut ext = Vec::with_capacity(exterior.len());
    for &l in exterior {
        let r = resolvent_transform(params, g, f, l, quad)?;
        let q = shape(l);
        num += r * q.conj();
        den += q.norm_sqr();
        ext.push((q, r));
    }
    let a = num / den;
    let exterior_fit_error = ext.iter().map(|&(q, r)| (r - a * q).norm()).fold(0.0, f64::max);
    let mut interior_deviation = 0.0f64;
    for &l in interior {
        let r = resolvent_transform(params, g, f, l, quad)?;
        interior_deviation = interior_deviation.max((r - a * shape(l)).norm());
    }
    Ok(GlueReport {
        a,
        exterior_fit_error,
        interior_deviation,
    })
}

/// `|∂_x R - ∂_y R / i|` at `λ` from a four-point stencil of width `h`;
/// vanishes for holomorphic `R`.
pub fn cauchy_riemann_residual(
    r: impl Fn(SpectralPoint) -> Result<Complex64>,
    lambda: SpectralPoint,
    h: f64,
) -> Result<f64> {
    let at = |dz: Complex64| r(SpectralPoint(lambda.0 + dz));
    let dx = (at(Complex64::new(h, 0.0))? - at(Complex64::new(-h, 0.0))?) / (2.0 * h);
    let dy = (at(Complex64::new(0.0, h))? - at(Complex64::new(0.0, -h))?) / (2.0 * h);
    Ok((dx + Complex64::i() * dy).norm())
}

/// `|R(λ)|·d(λ, ∂S₁)/(1 + |λ|)^K` over exterior samples, with the fitted `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDiagnostic {
    pub lambdas: Vec<Complex64>,
    /// `|R(λ)|·d(λ, ∂S₁)`.
    pub ratios: Vec<f64>,
    pub exponent: Option<u32>,
}

pub fn resolvent_envelope(
    params: &JacobiParams,
    g: &(impl EvenFunction + ?Sized),
    f: &(impl EvenFunction + ?Sized),
    exterior: &[SpectralPoint],
    quad: &QuadratureSpec,
) -> Result<EnvelopeDiagnostic> {
    let mut ratios = Vec::with_capacity(exterior.len());
    for &l in exterior {
        let r = resolvent_transform(params, g, f, l, quad)?;
        ratios.push(r.norm() * (l.0.im.abs() - params.rho()).abs());
    }
    let lambdas: Vec<Complex64> = exterior.iter().map(|l| l.0).collect();
    let exponent = fit_exponent(&lambdas, &ratios);
    Ok(EnvelopeDiagnostic {
        lambdas,
        ratios,
        exponent,
    })
}

/// Sampling used by [`span_density_demo`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanSampling {
    /// Right end of the sampled range (clipped to the target's support).
    pub horizon: f64,
    /// Gauss-Legendre panels of width `panel` with `order` nodes.
    pub panel: f64,
    pub order: usize,
}

impl Default for SpanSampling {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            panel: 0.1,
            order: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanReport {
    /// Number of kernels in each nested fit.
    pub sizes: Vec<usize>,
    /// Relative `Δ`-weighted L² residuals (the minimized quantity).
    pub residuals: Vec<f64>,
    /// Relative `Δ`-weighted L¹ residuals of the same fits.
    pub l1_residuals: Vec<f64>,
    /// Condition number of each least-squares matrix.
    pub conditions: Vec<f64>,
    /// Set when small singular values were cut off.
    pub regularized: bool,
}

/// Singular values below this fraction of the largest are dropped.
const SVD_CUTOFF: f64 = 1e-13;

/// Best approximations of `target` by combinations of `b_{λ_1..λ_k}` for
/// `k = 2, 4, 8, …` (and all of `lambdas`), measured in the `Δ`-weighted L²
/// norm on a Gauss sample.
pub fn span_density_demo(
    params: &JacobiParams,
    target: &(impl EvenFunction + ?Sized),
    lambdas: &[SpectralPoint],
    sampling: &SpanSampling,
    quad: &QuadratureSpec,
) -> Result<SpanReport> {
    if lambdas.len() < 2 {
        return Err(Error::Invalid("need at least two kernels".into()));
    }
    for l in lambdas {
        if !(l.0.im > params.rho()) {
            return Err(Error::domain(format!("b_λ with λ = {} is not integrable", l.0)));
        }
    }
    require_integrable_target(params, target, quad)?;
    let horizon = sampling.horizon.min(target.support().max(sampling.panel));
    let panels = (horizon / sampling.panel).ceil().max(1.0) as usize;
    let h = horizon / panels as f64;
    let rule = gauss_legendre(sampling.order);
    let mut nodes = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        for &(x, w) in rule.iter() {
            let t = (p as f64 + 0.5 * (1.0 + x)) * h;
            nodes.push((t, 2.0 * w * 0.5 * h * log_delta(params, t).exp()));
        }
    }
    let kernels: Vec<ResolventKernel> = lambdas
        .iter()
        .map(|&l| ResolventKernel::new(params, l))
        .collect::<Result<_>>()?;
    let n = nodes.len();
    let columns: Vec<Vec<Complex64>> = kernels
        .par_iter()
        .map(|k| nodes.iter().map(|&(t, w)| Ok(k.value(t)? * w.sqrt())).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let rhs = DVector::from_iterator(n, nodes.iter().map(|&(t, w)| target.eval(t) * w.sqrt()));
    let target_l2 = rhs.norm();
    let target_l1: f64 = nodes.iter().map(|&(t, w)| target.eval(t).norm() * w).sum();
    if target_l2 == 0.0 {
        return Err(Error::Invalid("target vanishes on the sample".into()));
    }
    let mut sizes = Vec::new();
    let mut k = 2;
    while k < lambdas.len() {
        sizes.push(k);
        k *= 2;
    }
    sizes.push(lambdas.len());
    let mut report = SpanReport {
        sizes: sizes.clone(),
        residuals: Vec::new(),
        l1_residuals: Vec::new(),
        conditions: Vec::new(),
        regularized: false,
    };
    for &k in &sizes {
        // Columns are scaled to unit norm before the solve.
        let scales: Vec<f64> = columns[..k]
            .iter()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
            .collect();
        let a = DMatrix::from_fn(n, k, |i, j| columns[j][i] / scales[j]);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        report.conditions.push(smax / smin);
        if smin < SVD_CUTOFF * smax {
            report.regularized = true;
        }
        let coef = svd
            .solve(&rhs, SVD_CUTOFF * smax)
            .map_err(|e| Error::Invalid(format!("least squares failed: {e}")))?;
        let resid = &rhs - &a * coef;
        report.residuals.push(resid.norm() / target_l2);
        let l1: f64 = resid
            .iter()
            .zip(&nodes)
            .map(|(r, &(_, w))| r.norm() * w.sqrt())
            .sum();
        report.l1_residuals.push(l1 / target_l1);
    }
    Ok(report)
}

/// Rejects targets whose truncated `Δ`-weighted norms on `[0, 10]`,
/// `[0, 20]`, `[0, 40]` do not settle geometrically.
fn require_integrable_target(
    params: &JacobiParams,
    target: &(impl EvenFunction + ?Sized),
    quad: &QuadratureSpec,
) -> Result<()> {
    if target.support().is_finite() {
        return Ok(());
    }
    let partial = |upper: f64| -> Result<f64> {
        let f = crate::grid::FnEven::with_support(|t| Complex64::new(target.eval(t).norm(), 0.0), upper);
        crate::translation::l1_norm(params, &f, quad)
    };
    let (a, b, c) = (partial(10.0)?, partial(20.0)?, partial(40.0)?);
    let growing = (c - b) > 1e-6 * c && (c - b) >= 0.5 * (b - a);
    if !c.is_finite() || growing {
        return Err(Error::domain(
            "target is not integrable against Δ (its truncated norms keep growing)",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FnEven;

    fn bump(t: f64) -> Complex64 {
        if t.abs() >= 1.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new((1.0 - t * t).powi(4), 0.0)
        }
    }

    #[test]
    fn decay_indicators_on_synthetic_families() {
        for &rho in &[0.5, 1.0, 3.5] {
            let k = PI / (2.0 * rho);
            for &c in &[1.0, 2.0] {
                let s: Vec<(f64, f64)> = (1..=400).map(|i| {
                    let t = i as f64 * 0.1;
                    (t, -c * (k * t).exp())
                }).collect();
                let d = delta_inf_plus(&s, rho).unwrap();
                assert!((d.value - c).abs() < 1e-6, "ρ = {rho}: {}", d.value);
            }
            let d = delta_irho(|x| Ok(-1.0 / (rho - x)), 0.0, rho, 20).unwrap();
            assert!((d.value + 1.0).abs() < 1e-9);
            let d = delta_irho(|_| Ok(0.0), 0.0, rho, 20).unwrap();
            assert_eq!(d.value, 0.0);
        }
        let flat: Vec<(f64, f64)> = (1..=400).map(|i| (i as f64 * 0.1, 0.5f64.ln())).collect();
        assert!(delta_inf_plus(&flat, 1.0).unwrap().value.abs() < 1e-3);
        assert!(delta_inf_plus(&[], 1.0).is_err());
    }

    #[test]
    fn scan_flags_the_augmentation_points() {
        let p = JacobiParams::new(0.5, -0.5).unwrap();
        let quad = QuadratureSpec::with_tol(1e-12);
        let grid = StripScanGrid {
            re_max: 6.0,
            re_n: 6,
            im_margin: 0.25,
            im_n: 2,
        };
        let f = FnEven::with_support(bump, 1.0);
        let fhat = |l: SpectralPoint| forward_transform(&p, &f, l, &quad);
        let report = scan_common_zeros(&p, &[&fhat], &grid, 1e-6).unwrap();
        assert!(report.cells.is_empty(), "{:?}", report.cells);
        // f minus its mass times a normalized second bump lies in L¹₀.
        let g = FnEven::with_support(|t: f64| bump(2.0 * t), 0.5);
        let mf = crate::translation::l10_defect(&p, &f, &quad).unwrap();
        let mg = crate::translation::l10_defect(&p, &g, &quad).unwrap();
        let h = FnEven::with_support(move |t: f64| bump(t) - mf / mg * bump(2.0 * t), 1.0);
        let hhat = |l: SpectralPoint| forward_transform(&p, &h, l, &quad);
        let report = scan_common_zeros(&p, &[&hhat], &grid, 1e-6).unwrap();
        assert!(!report.cells.is_empty());
        assert!(report.only_rho_candidates);
        let joint = scan_common_zeros(&p, &[&hhat, &fhat], &grid, 1e-6).unwrap();
        assert!(joint.cells.is_empty());
    }

    #[test]
    fn span_demo_reproduces_members() {
        let p = JacobiParams::new(0.5, -0.5).unwrap();
        let quad = QuadratureSpec::default();
        let lambdas = [SpectralPoint::imag(1.5), SpectralPoint::imag(2.0), SpectralPoint::imag(3.0)];
        let k = ResolventKernel::new(&p, lambdas[1]).unwrap();
        let target = FnEven::new(move |t: f64| if t == 0.0 { Complex64::new(0.0, 0.0) } else { k.value(t).unwrap() });
        let r = span_density_demo(&p, &target, &lambdas, &SpanSampling::default(), &quad).unwrap();
        assert!(*r.residuals.last().unwrap() < 1e-8, "{r:?}");
        let one = FnEven::new(|_| Complex64::new(1.0, 0.0));
        assert!(span_density_demo(&p, &one, &lambdas, &SpanSampling::default(), &quad).is_err());
    }
}
