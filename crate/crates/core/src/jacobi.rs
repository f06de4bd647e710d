//! Jacobi functions of the first and second kind, the c-function, the weight
//! `Δ`, Heckman-Opdam functions and the operators they diagonalize.
//!
//! `φ_λ(t)` is evaluated along one of three routes:
//!
//! * the hypergeometric series in `-sinh²t` (with Pfaff continuation) while
//!   the cancellation it suffers stays small;
//! * the connection formula `φ_λ = c(λ)Φ_λ + c(-λ)Φ_{-λ}` otherwise;
//! * near `λ ∈ iℤ`, where the connection formula degenerates, the mean over
//!   a small circle around `λ` (φ is entire in `λ`).

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EvenFunction, LineFunction};
use crate::params::{JacobiParams, SpectralPoint};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::{hyp2f1, is_gamma_pole, log_gamma, recip_gamma};

/// Relative tolerance for internal hypergeometric sums.
pub(crate) const SERIES_TOL: f64 = 1e-14;

/// Digits we are willing to lose to cancellation in the direct series.
const MAX_SERIES_LOSS: f64 = 7.5;
/// Past this `t` the series route is not attempted.
const SERIES_MAX_T: f64 = 2.5;
/// Distance from `iℤ` (in `λ`) or from `ℤ` (in `α`) treated as degenerate.
const DEGENERATE_GAP: f64 = 0.02;
/// Radius of the averaging circle used near degenerate points.
const CIRCLE_RADIUS: f64 = 0.05;
/// Crossover between the two expansions of `Φ_λ`.
const PHI2_COSH_MIN_T: f64 = 0.7;
const PHI2_SMALL_T_MAX_OSC: f64 = 8.0;

/// Finite-difference step of the differential operators.
pub const FD_STEP: f64 = 1e-3;

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn lngamma(z: Complex64) -> Result<Complex64> {
    log_gamma(z, 1e-14)
}

/// `ln(2 sinh t)` for `t > 0`.
fn ln_two_sinh(t: f64) -> f64 {
    t + (-(-2.0 * t).exp()).ln_1p()
}

/// `ln(2 cosh t)`.
fn ln_two_cosh(t: f64) -> f64 {
    let t = t.abs();
    t + (-2.0 * t).exp().ln_1p()
}

/// `Δ(t) = (2|sinh t|)^{2α+1} (2cosh t)^{2β+1}`.
pub fn weight_delta(params: &JacobiParams, t: f64) -> f64 {
    let t = t.abs();
    if t == 0.0 {
        return 0.0;
    }
    log_delta(params, t).exp()
}

/// `ln Δ(t)`; `-∞` at `t = 0`.
pub fn log_delta(params: &JacobiParams, t: f64) -> f64 {
    let t = t.abs();
    if t == 0.0 {
        return f64::NEG_INFINITY;
    }
    (2.0 * params.alpha() + 1.0) * ln_two_sinh(t) + (2.0 * params.beta() + 1.0) * ln_two_cosh(t)
}

/// Distance from `λ` to the nearest point of `iℤ`.
fn gap_to_imag_integers(lambda: Complex64) -> f64 {
    let k = lambda.im.round();
    Complex64::new(lambda.re, lambda.im - k).norm()
}

/// Representative of `{λ, -λ}` so that `φ_λ = φ_{-λ}` holds bit for bit.
fn canonical(lambda: Complex64) -> Complex64 {
    if lambda.re < 0.0 || (lambda.re == 0.0 && lambda.im < 0.0) {
        -lambda
    } else {
        lambda
    }
}

/// Points `center + r e^{2πik/N}`.
fn circle(center: Complex64, r: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |k| center + Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64))
}

/// Spherical Jacobi function `φ_λ(t)`.
pub fn phi(params: &JacobiParams, lambda: SpectralPoint, t: f64) -> Result<Complex64> {
    phi_ab(params.alpha(), params.beta(), lambda.0, t)
}

pub(crate) fn phi_ab(alpha: f64, beta: f64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let t = t.abs();
    if t == 0.0 {
        return Ok(c64(1.0));
    }
    let lambda = canonical(lambda);
    if series_route_ok(lambda, t) {
        return phi_series(alpha, beta, lambda, t);
    }
    if gap_to_imag_integers(lambda) > DEGENERATE_GAP {
        return phi_connection(alpha, beta, lambda, t);
    }
    let n = 24usize.max((std::f64::consts::E * CIRCLE_RADIUS * t).ceil() as usize + 16);
    let mut acc = c64(0.0);
    for mu in circle(lambda, CIRCLE_RADIUS, n) {
        acc += phi_connection(alpha, beta, mu, t)?;
    }
    Ok(acc / n as f64)
}

fn series_route_ok(lambda: Complex64, t: f64) -> bool {
    if t > SERIES_MAX_T {
        return false;
    }
    let s = t.sinh();
    let loss = if s * s <= 0.5 { lambda.norm() * s } else { lambda.norm() * t.tanh() };
    loss <= MAX_SERIES_LOSS
}

/// `₂F₁((ρ-iλ)/2, (ρ+iλ)/2; α+1; -sinh²t)` summed directly.
fn phi_series(alpha: f64, beta: f64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let rho = alpha + beta + 1.0;
    let il = Complex64::i() * lambda;
    let s = t.sinh();
    hyp2f1((rho - il) / 2.0, (rho + il) / 2.0, c64(alpha + 1.0), -s * s, SERIES_TOL)
}

/// `c(λ)Φ_λ(t) + c(-λ)Φ_{-λ}(t)` assembled in log space.
fn phi_connection(alpha: f64, beta: f64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let a = c64(alpha);
    let b = c64(beta);
    Ok(c_phi2_term(a, b, lambda, t)? + c_phi2_term(a, b, -lambda, t)?)
}

/// `c(λ) Φ_λ(t)`.
fn c_phi2_term(alpha: Complex64, beta: Complex64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let rho = alpha + beta + 1.0;
    let il = Complex64::i() * lambda;
    let ln_num = (rho - il) * LN_2 + lngamma(alpha + 1.0)? + lngamma(il)?;
    let den = recip_gamma((rho + il) / 2.0) * recip_gamma((il + alpha - beta + 1.0) / 2.0);
    if den == c64(0.0) {
        return Ok(den);
    }
    let ln_phi2 = ln_phi_second_kind(alpha, beta, lambda, t)?;
    Ok((ln_num + ln_phi2).exp() * den)
}

/// Harish-Chandra c-function.
pub fn c_function(params: &JacobiParams, lambda: SpectralPoint) -> Result<Complex64> {
    let il = Complex64::i() * lambda.0;
    if is_gamma_pole(il) {
        return Err(Error::domain(format!(
            "c-function has a pole at λ = {}i",
            lambda.0.im
        )));
    }
    let (a, b, rho) = (params.alpha(), params.beta(), params.rho());
    let ln_num = (rho - il) * LN_2 + lngamma(c64(a + 1.0))? + lngamma(il)?;
    let den = recip_gamma((rho + il) / 2.0) * recip_gamma((il + a - b + 1.0) / 2.0);
    Ok(ln_num.exp() * den)
}

/// `|c(λ)|^{-2}` for real `λ`, with the removable zero at `λ = 0`.
pub fn plancherel_density(params: &JacobiParams, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let c = c_function(params, SpectralPoint::real(lambda))?;
    Ok(1.0 / c.norm_sqr())
}

/// Second-kind Jacobi function `Φ_λ(t)`, `t > 0`.
pub fn phi_second_kind(params: &JacobiParams, lambda: SpectralPoint, t: f64) -> Result<Complex64> {
    check_phi2_args(lambda.0, t)?;
    Ok(ln_phi_second_kind(c64(params.alpha()), c64(params.beta()), lambda.0, t)?.exp())
}

/// `ln Φ_λ(t)`, for callers that combine it with other large or tiny factors.
pub(crate) fn ln_phi2(params: &JacobiParams, lambda: Complex64, t: f64) -> Result<Complex64> {
    check_phi2_args(lambda, t)?;
    ln_phi_second_kind(c64(params.alpha()), c64(params.beta()), lambda, t)
}

fn check_phi2_args(lambda: Complex64, t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("Φ_λ(t) needs t > 0 (got t = {t})")));
    }
    if is_gamma_pole(1.0 - Complex64::i() * lambda) {
        return Err(Error::domain(format!(
            "Φ_λ undefined at λ = {}i",
            lambda.im
        )));
    }
    Ok(())
}

/// `Φ_λ` from the expansion in `cosh⁻²t`.
pub fn phi_second_kind_cosh_form(
    params: &JacobiParams,
    lambda: SpectralPoint,
    t: f64,
) -> Result<Complex64> {
    check_phi2_args(lambda.0, t)?;
    Ok(ln_phi2_cosh(c64(params.alpha()), c64(params.beta()), lambda.0, t)?.exp())
}

/// `Φ_λ` from the expansion in `-sinh⁻²t` (continued by Pfaff when
/// `sinh²t < 2`).
pub fn phi_second_kind_sinh_form(
    params: &JacobiParams,
    lambda: SpectralPoint,
    t: f64,
) -> Result<Complex64> {
    check_phi2_args(lambda.0, t)?;
    let (a, b, rho) = (params.alpha(), params.beta(), params.rho());
    let il = Complex64::i() * lambda.0;
    let s = t.sinh();
    let f = hyp2f1((rho - il) / 2.0, (b - a + 1.0 - il) / 2.0, 1.0 - il, -1.0 / (s * s), SERIES_TOL)?;
    Ok(((il - rho) * ln_two_sinh(t)).exp() * f)
}

fn ln_phi_second_kind(alpha: Complex64, beta: Complex64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let osc = lambda.norm() * t.sinh();
    if t >= PHI2_COSH_MIN_T || osc > PHI2_SMALL_T_MAX_OSC {
        return ln_phi2_cosh(alpha, beta, lambda, t);
    }
    let k = alpha.re.round();
    if (alpha - k).norm() > DEGENERATE_GAP {
        return Ok(phi2_small_t(alpha, beta, lambda, t)?.ln());
    }
    // Φ is entire in α; average around the nearby integer.
    let s = t.sinh();
    let n = 16usize.max((std::f64::consts::E * CIRCLE_RADIUS * (2.0 * s.ln().abs() + 2.0)).ceil() as usize + 14);
    let mut acc = c64(0.0);
    for a in circle(alpha, CIRCLE_RADIUS, n) {
        acc += phi2_small_t(a, beta, lambda, t)?;
    }
    Ok((acc / n as f64).ln())
}

fn ln_phi2_cosh(alpha: Complex64, beta: Complex64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let rho = alpha + beta + 1.0;
    let il = Complex64::i() * lambda;
    let ch = t.cosh();
    let f = hyp2f1((rho - il) / 2.0, (alpha - beta + 1.0 - il) / 2.0, 1.0 - il, 1.0 / (ch * ch), SERIES_TOL)?;
    Ok((il - rho) * ln_two_cosh(t) + f.ln())
}

/// Continuation of the sinh-form through `z ↦ 1/z`, valid for small `t`
/// and non-integer `α`.
fn phi2_small_t(alpha: Complex64, beta: Complex64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let rho = alpha + beta + 1.0;
    let il = Complex64::i() * lambda;
    let s = t.sinh();
    let z = -s * s;
    let bp = (beta - alpha + 1.0 - il) / 2.0;
    let lead = ((il - rho) * LN_2 + lngamma(1.0 - il)?).exp();
    let g1 = lngamma(-alpha)?.exp() * recip_gamma(bp) * recip_gamma((1.0 - alpha - beta - il) / 2.0);
    let g2 = lngamma(alpha)?.exp() * recip_gamma((rho - il) / 2.0) * recip_gamma((1.0 + alpha - beta - il) / 2.0);
    let f1 = hyp2f1((rho - il) / 2.0, (rho + il) / 2.0, alpha + 1.0, z, SERIES_TOL)?;
    let f2 = hyp2f1(bp, (beta - alpha + 1.0 + il) / 2.0, 1.0 - alpha, z, SERIES_TOL)?;
    let pow = (-2.0 * alpha * s.ln()).exp();
    Ok(lead * (g1 * f1 + g2 * pow * f2))
}

/// `φ'_λ(t) = -(λ²+ρ²)/(4(α+1)) sinh 2t · φ_λ^{(α+1,β+1)}(t)`.
pub fn phi_dt(params: &JacobiParams, lambda: SpectralPoint, t: f64) -> Result<Complex64> {
    let l = lambda.0;
    let shifted = params.shifted();
    let k = -(l * l + params.rho() * params.rho()) / (4.0 * (params.alpha() + 1.0));
    Ok(k * (2.0 * t).sinh() * phi(&shifted, lambda, t)?)
}

/// Heckman-Opdam function `G_λ(x)`, defined on all of ℝ.
pub fn heckman_opdam_g(params: &JacobiParams, lambda: SpectralPoint, x: f64) -> Result<Complex64> {
    let il = Complex64::i() * lambda.0;
    let k = (params.rho() + il) / (4.0 * (params.alpha() + 1.0));
    Ok(phi(params, lambda, x)? + k * (2.0 * x).sinh() * phi(&params.shifted(), lambda, x)?)
}

fn check_stencil(t: f64, reach: f64, half_width: f64, spacing: Option<f64>) -> Result<()> {
    let guard = 2.0 * FD_STEP.max(spacing.unwrap_or(0.0));
    if t.abs() < guard {
        return Err(Error::domain(format!(
            "t = {t} is within {guard} of the coth singularity at 0"
        )));
    }
    if t.abs() + reach > half_width {
        return Err(Error::domain(format!(
            "stencil around t = {t} leaves the sampled range [0, {half_width}]"
        )));
    }
    Ok(())
}

/// Five-point first and second derivatives at step `h`.
fn stencil(f: impl Fn(f64) -> Complex64, t: f64, h: f64) -> (Complex64, Complex64) {
    let (m2, m1, z, p1, p2) = (f(t - 2.0 * h), f(t - h), f(t), f(t + h), f(t + 2.0 * h));
    let d1 = (m2 - p2 + (p1 - m1) * 8.0) / (12.0 * h);
    let d2 = (-m2 - p2 + (p1 + m1) * 16.0 - z * 30.0) / (12.0 * h * h);
    (d1, d2)
}

/// Richardson-combined five-point derivatives (steps `h` and `h/2`).
fn derivatives(f: impl Fn(f64) -> Complex64 + Copy, t: f64) -> (Complex64, Complex64) {
    let (a1, a2) = stencil(f, t, FD_STEP);
    let (b1, b2) = stencil(f, t, FD_STEP / 2.0);
    ((b1 * 16.0 - a1) / 15.0, (b2 * 16.0 - a2) / 15.0)
}

fn drift(params: &JacobiParams, t: f64) -> f64 {
    (2.0 * params.alpha() + 1.0) / t.tanh() + (2.0 * params.beta() + 1.0) * t.tanh()
}

/// `L f(t) = f'' + ((2α+1)coth t + (2β+1)tanh t) f'` by finite differences.
pub fn apply_l(params: &JacobiParams, f: &(impl EvenFunction + ?Sized), t: f64) -> Result<Complex64> {
    check_stencil(t, 2.0 * FD_STEP, f.support(), EvenFunction::spacing(f))?;
    let t = t.abs();
    let (d1, d2) = derivatives(|x| f.eval(x), t);
    Ok(d2 + d1 * drift(params, t))
}

/// Cherednik operator
/// `T f(t) = f'(t) + ((2α+1)coth t + (2β+1)tanh t)(f(t) - f(-t))/2 - ρ f(-t)`.
pub fn apply_cherednik_t(
    params: &JacobiParams,
    f: &(impl LineFunction + ?Sized),
    t: f64,
) -> Result<Complex64> {
    check_stencil(t, 2.0 * FD_STEP, f.half_width(), f.spacing())?;
    let (d1, _) = derivatives(|x| f.eval_line(x), t);
    let odd = (f.eval_line(t) - f.eval_line(-t)) / 2.0;
    Ok(d1 + odd * drift(params, t) - f.eval_line(-t) * params.rho())
}

/// `d/dx φ_{ix}(t)` at `x = ρ`, computed by finite differences and checked
/// against closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoDerivative {
    pub t: f64,
    /// Central difference at step `h/2`.
    pub value: f64,
    /// `|D(h) - D(h/2)|`.
    pub halving_change: f64,
    /// `½∫₀¹ (1-v)^α [1 - (1 + v sinh²t)^{-ρ}] / v dv`, the antiderivative of
    /// `g'(u) = ρ sinh 2u/(2(α+1)) ₂F₁(ρ+1, 1; α+2; -sinh²u)`.
    pub closed_form: f64,
    /// Same chain with `sinh u` in place of `sinh 2u`.
    pub sinh_variant: f64,
}

impl RhoDerivative {
    pub fn closed_form_matches(&self, tol: f64) -> bool {
        (self.value - self.closed_form).abs() <= tol * (1.0 + self.value.abs())
    }

    pub fn sinh_variant_matches(&self, tol: f64) -> bool {
        (self.value - self.sinh_variant).abs() <= tol * (1.0 + self.value.abs())
    }
}

pub const RHO_DERIVATIVE_STEP: f64 = 1e-4;

pub fn phi_dx_at_rho(params: &JacobiParams, t: f64) -> Result<RhoDerivative> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("derivative in x needs t > 0 (got {t})")));
    }
    let rho = params.rho();
    let central = |h: f64| -> Result<f64> {
        let up = phi(params, SpectralPoint::imag(rho + h), t)?.re;
        let down = phi(params, SpectralPoint::imag(rho - h), t)?.re;
        Ok((up - down) / (2.0 * h))
    };
    let d_h = central(RHO_DERIVATIVE_STEP)?;
    let d_h2 = central(RHO_DERIVATIVE_STEP / 2.0)?;
    Ok(RhoDerivative {
        t,
        value: d_h2,
        halving_change: (d_h - d_h2).abs(),
        closed_form: rho_derivative_closed_form(params, t)?,
        sinh_variant: rho_derivative_sinh_variant(params, t)?,
    })
}

/// `v = 1 - w^{1/(α+1)}` absorbs the `(1-v)^α` endpoint factor:
/// `∫₀¹ (1-v)^α h(v) dv = (α+1)^{-1} ∫₀¹ h(1 - w^{1/(α+1)}) dw`.
fn beta_weighted(alpha: f64, h: impl Fn(f64) -> f64, quad: &QuadratureSpec) -> Result<f64> {
    let e = 1.0 / (alpha + 1.0);
    let r = integrate(|w| c64(h(1.0 - w.powf(e))), 0.0, 1.0, quad)?;
    Ok(r.value.re * e)
}

fn rho_derivative_closed_form(params: &JacobiParams, t: f64) -> Result<f64> {
    let (alpha, rho) = (params.alpha(), params.rho());
    let s2 = t.sinh().powi(2);
    let quad = QuadratureSpec::with_tol(1e-13);
    let h = |v: f64| {
        if v <= 0.0 {
            rho * s2
        } else {
            -(-rho * (v * s2).ln_1p()).exp_m1() / v
        }
    };
    Ok(0.5 * beta_weighted(alpha, h, &quad)?)
}

fn rho_derivative_sinh_variant(params: &JacobiParams, t: f64) -> Result<f64> {
    let (alpha, rho) = (params.alpha(), params.rho());
    let inner = QuadratureSpec::with_tol(1e-12);
    let outer = QuadratureSpec::with_tol(1e-10);
    let r = integrate(
        |u| {
            let s = u.sinh();
            let s2 = s * s;
            let v = beta_weighted(alpha, |v| (-(rho + 1.0) * (v * s2).ln_1p()).exp(), &inner)
                .unwrap_or(f64::NAN);
            c64(0.5 * rho * s * v)
        },
        0.0,
        t,
        &outer,
    )?;
    Ok(r.value.re)
}
