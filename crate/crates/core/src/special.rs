//! Complex log-gamma and the Gauss hypergeometric function ₂F₁ on the real
//! half-line `z < 1`.
//!
//! The hypergeometric series is summed directly for `|z| <= 1/2`; for
//! `z < -1/2` the Pfaff transformation
//!
//! ```text
//! ₂F₁(a, b; c; z) = (1 - z)^(-a) ₂F₁(a, c - b; c; z / (z - 1))
//! ```
//!
//! maps the argument into `(1/3, 1)`, where the series converges again.
//! An Euler-integral evaluation is provided as an independent cross-check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 100_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos approximation achieves roughly this relative accuracy on Γ.
const LANCZOS_ACCURACY: f64 = 2e-15;

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// True when `z` is one of the poles `0, -1, -2, ...` of Γ.
pub fn is_gamma_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln sin(w)` without overflow for large `|Im w|`.
fn ln_sin(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im > 10.0 {
        // sin w = e^{-iw}(e^{2iw} - 1)/(2i)
        -i * w + ((2.0 * i * w).exp() - 1.0).ln() - (2.0 * i).ln()
    } else if w.im < -10.0 {
        // sin w = e^{iw}(1 - e^{-2iw})/(2i)
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - (2.0 * i).ln()
    } else {
        w.sin().ln()
    }
}

fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = std::f64::consts::PI;
        return c64(pi.ln()) - ln_sin(pi * z) - ln_gamma_unchecked(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = c64(LANCZOS_COEFFS[0]);
    for (k, &p) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += p / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    c64(0.5 * (2.0 * std::f64::consts::PI).ln()) + (z + 0.5) * t.ln() - t + x.ln()
}

/// Complex log-gamma with the requested relative accuracy on `exp(result)`.
pub fn log_gamma(z: Complex64, tol: f64) -> Result<Complex64> {
    if is_gamma_pole(z) {
        return Err(Error::domain(format!(
            "log_gamma evaluated at the pole z = {}",
            z.re
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    if tol < LANCZOS_ACCURACY {
        return Err(Error::precision(
            format!("log_gamma cannot reach tolerance {tol:e}"),
            LANCZOS_ACCURACY,
        ));
    }
    Ok(ln_gamma_unchecked(z))
}

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma_unchecked(c64(x)).re
}

/// Γ(z); errors at poles.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z, DEFAULT_TOL)?.exp())
}

/// 1/Γ(z), entire: exactly zero at the poles of Γ.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if is_gamma_pole(z) {
        Complex64::new(0.0, 0.0)
    } else {
        (-ln_gamma_unchecked(z)).exp()
    }
}

/// Parameters of ₂F₁(a, b; c; z) with complex `a`, `b`, real `c > 0` and real `z < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricArgs {
    pub a: Complex64,
    pub b: Complex64,
    pub c: f64,
    pub z: f64,
}

impl HypergeometricArgs {
    pub fn new(a: impl Into<Complex64>, b: impl Into<Complex64>, c: f64, z: f64) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c,
            z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::domain(format!(
                "₂F₁ needs c > 0 (got c = {})",
                self.c
            )));
        }
        if !(self.z < 1.0) {
            return Err(Error::domain(format!(
                "₂F₁ argument must satisfy z < 1 (got z = {})",
                self.z
            )));
        }
        Ok(())
    }
}

/// ₂F₁(a, b; c; z) to relative accuracy `tol`.
pub fn gauss_2f1(args: &HypergeometricArgs, tol: f64) -> Result<Complex64> {
    args.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    hyp2f1(args.a, args.b, c64(args.c), args.z, tol)
}

/// ₂F₁ with complex `c`, used internally by the Jacobi-function routines.
pub(crate) fn hyp2f1(a: Complex64, b: Complex64, c: Complex64, z: f64, tol: f64) -> Result<Complex64> {
    if is_gamma_pole(c) {
        return Err(Error::domain(format!(
            "₂F₁ undefined for c = {} (non-positive integer)",
            c.re
        )));
    }
    if !(z < 1.0) {
        return Err(Error::domain(format!("₂F₁ argument z = {z} is on the cut")));
    }
    if z == 0.0 || a == c64(0.0) || b == c64(0.0) {
        return Ok(c64(1.0));
    }
    if z >= -0.5 {
        series(a, b, c, z, tol)
    } else {
        let w = z / (z - 1.0);
        let pre = (c64(1.0 - z).ln() * (-a)).exp();
        Ok(pre * series(a, c - b, c, w, tol)?)
    }
}

/// Largest ratio of the biggest term to the sum accepted from a series
/// (about seven significant digits survive).
pub const MAX_CANCELLATION: f64 = 1e9;

/// Direct hypergeometric series; stops once three consecutive terms fall
/// below `tol · |partial sum| · (1 - |z|)`.
pub(crate) fn series(a: Complex64, b: Complex64, c: Complex64, z: f64, tol: f64) -> Result<Complex64> {
    debug_assert!(z.abs() < 1.0);
    let mut term = c64(1.0);
    let mut sum = c64(1.0);
    let mut quiet = 0;
    let mut largest = 1.0f64;
    let shrink = (1.0 - z.abs()).max(1e-3);
    let settle = |sum: Complex64, largest: f64| {
        let loss = largest / sum.norm();
        if loss > MAX_CANCELLATION {
            Err(Error::precision(
                format!("₂F₁ series lost a factor {loss:.1e} to cancellation"),
                loss * f64::EPSILON,
            ))
        } else {
            Ok(sum)
        }
    };
    for n in 0..MAX_SERIES_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        let t = term.norm();
        largest = largest.max(t);
        if t == 0.0 {
            return settle(sum, largest);
        }
        if t <= tol * shrink * sum.norm() {
            quiet += 1;
            if quiet >= 3 {
                return settle(sum, largest);
            }
        } else {
            quiet = 0;
        }
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::precision("₂F₁ series overflowed", f64::INFINITY));
        }
    }
    Err(Error::precision(
        format!("₂F₁ series did not converge in {MAX_SERIES_TERMS} terms"),
        term.norm() / sum.norm(),
    ))
}

/// Direct quadrature of the Euler integral
///
/// ```text
/// Γ(c) / (Γ(b) Γ(c-b)) ∫₀¹ s^(b-1) (1-s)^(c-b-1) (1-sz)^(-a) ds
/// ```
///
/// valid for `Re c > Re b > 0`. Each half of `[0, 1]` is mapped with a power
/// substitution that removes the algebraic endpoint factor.
pub fn euler_integral_2f1(args: &HypergeometricArgs, quad: &QuadratureSpec) -> Result<Complex64> {
    let (a, b, c, z) = (args.a, args.b, c64(args.c), args.z);
    if !(b.re > 0.0 && args.c > b.re) {
        return Err(Error::domain(format!(
            "Euler integral needs Re c > Re b > 0 (got b = {b}, c = {})",
            args.c
        )));
    }
    if !(z < 1.0) {
        return Err(Error::domain(format!("Euler integral needs z < 1 (got {z})")));
    }
    let cb = c - b;
    let p = b.re;
    let q = cb.re;

    // s = v^{1/p}/2 on the left half.
    let left = integrate(
        |v| {
            if v <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let s = 0.5 * v.powf(1.0 / p);
            let osc = ((b - p) / p * v.ln()).exp();
            let rest = (cb - 1.0) * c64(1.0 - s).ln() - a * c64(1.0 - s * z).ln();
            osc * rest.exp()
        },
        0.0,
        1.0,
        quad,
    )?;
    let left = left.value * ((-b) * std::f64::consts::LN_2).exp() / p;

    // s = 1 - v^{1/q}/2 on the right half.
    let right = integrate(
        |v| {
            if v <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let u = 0.5 * v.powf(1.0 / q);
            let s = 1.0 - u;
            let osc = ((cb - q) / q * v.ln()).exp();
            let rest = (b - 1.0) * c64(s).ln() - a * c64(1.0 - s * z).ln();
            osc * rest.exp()
        },
        0.0,
        1.0,
        quad,
    )?;
    let right = right.value * ((-cb) * std::f64::consts::LN_2).exp() / q;

    let norm = (ln_gamma_unchecked(c) - ln_gamma_unchecked(b) - ln_gamma_unchecked(cb)).exp();
    Ok(norm * (left + right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn log_gamma_anchors() {
        let z = log_gamma(c64(1.0), 1e-12).unwrap();
        assert!(z.norm() < 1e-14);
        let half = log_gamma(c64(0.5), 1e-12).unwrap();
        assert!((half.re - 0.572_364_942_924_700_1).abs() < 1e-13);
        assert!(half.im.abs() < 1e-15);
        // |Γ(1+i)|² = π / sinh π
        let g = log_gamma(Complex64::new(1.0, 1.0), 1e-12).unwrap().exp();
        assert!((g.norm() - (PI / PI.sinh()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_rejects_poles() {
        for k in 0..4 {
            let r = log_gamma(c64(-(k as f64)), 1e-12);
            assert!(matches!(r, Err(Error::Domain(_))));
        }
        assert_eq!(recip_gamma(c64(-3.0)), c64(0.0));
    }

    #[test]
    fn reflection_branch_matches_recurrence() {
        // Γ(z+1) = z Γ(z) across the reflection boundary.
        let z = Complex64::new(-2.3, 0.7);
        let lhs = gamma(z + 1.0).unwrap();
        let rhs = z * gamma(z).unwrap();
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
        // large imaginary part must not overflow
        let big = gamma(Complex64::new(0.1, 120.0)).unwrap();
        assert!(big.norm().is_finite());
    }

    #[test]
    fn series_anchors() {
        let v = gauss_2f1(&HypergeometricArgs::new(0.7, 1.3, 2.0, 0.0), 1e-12).unwrap();
        assert_eq!(v, c64(1.0));
        let v = gauss_2f1(&HypergeometricArgs::new(1.0, 1.0, 2.0, -1.0), 1e-12).unwrap();
        assert!((v.re - 2f64.ln()).abs() < 1e-11);
        // terminating series
        let v = gauss_2f1(&HypergeometricArgs::new(-2.0, 1.5, 3.0, -5.0), 1e-12).unwrap();
        let direct = 1.0 + (-2.0 * 1.5 / 3.0) * -5.0 + (-2.0 * -1.0 * 1.5 * 2.5) / (3.0 * 4.0 * 2.0) * 25.0;
        assert!((v.re - direct).abs() < 1e-10);
    }

    #[test]
    fn invalid_arguments_are_domain_errors() {
        assert!(matches!(
            gauss_2f1(&HypergeometricArgs::new(1.0, 1.0, 0.0, 0.2), 1e-12),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            gauss_2f1(&HypergeometricArgs::new(1.0, 1.0, 2.0, 1.0), 1e-12),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            euler_integral_2f1(&HypergeometricArgs::new(1.0, 2.0, 2.0, 0.5), &QuadratureSpec::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn euler_integral_matches_closed_form() {
        let q = QuadratureSpec::default();
        let v = euler_integral_2f1(&HypergeometricArgs::new(1.0, 1.0, 2.0, -1.0), &q).unwrap();
        assert!((v.re - 2f64.ln()).abs() < 1e-10);
        let v = euler_integral_2f1(&HypergeometricArgs::new(Complex64::new(0.3, 2.0), 0.8, 1.9, 0.0), &q)
            .unwrap();
        assert!((v - c64(1.0)).norm() < 1e-10);
    }

    #[test]
    fn euler_integral_matches_series_at_minus_two() {
        let args = HypergeometricArgs::new(0.75, 0.5, 1.5, -2.0);
        let s = gauss_2f1(&args, 1e-12).unwrap();
        let e = euler_integral_2f1(&args, &QuadratureSpec::default()).unwrap();
        assert!((s - e).norm() < 1e-10, "{s} vs {e}");
        // midpoint sum after s = u², with Γ(1.5)/(Γ(0.5)Γ(1)) = 1/2
        let n = 200_000;
        let acc: f64 = (0..n)
            .map(|k| {
                let u = (k as f64 + 0.5) / n as f64;
                2.0 * (1.0 + 2.0 * u * u).powf(-0.75) / n as f64
            })
            .sum();
        assert!((0.5 * acc - s.re).abs() < 1e-9);
    }
}
