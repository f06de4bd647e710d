//! Quadrature engines shared by every integral in the crate.
//!
//! Two panel rules are available behind one globally adaptive driver:
//! a 10/20-point Gauss-Legendre pair and a Richardson-corrected Simpson
//! pair. Panels are bisected worst-first until the summed error estimate
//! drops below the absolute tolerance, the roundoff floor is reached, or the
//! subdivision budget runs out.
//!
//! Gauss-Jacobi node sets (Golub-Welsch) absorb algebraic endpoint
//! singularities for the translation kernels.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::sync::LazyLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadMethod {
    AdaptiveSimpson,
    GaussLegendreComposite,
}

/// Integration method, tolerance and budget threaded through every integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadMethod,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Hard truncation point for integrals over `[0, ∞)`.
    pub tail_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadMethod::GaussLegendreComposite,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            tail_cutoff: 400.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Invalid("abs_tol must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Invalid("max_subdivisions must be positive".into()));
        }
        if !(self.tail_cutoff > 0.0) {
            return Err(Error::Invalid("tail_cutoff must be positive".into()));
        }
        Ok(())
    }
}

/// An integral value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

impl Estimate {
    pub fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn panel_rule<F>(f: &F, a: f64, b: f64, method: QuadMethod) -> Panel
where
    F: Fn(f64) -> Complex64,
{
    match method {
        QuadMethod::GaussLegendreComposite => {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut coarse = Complex64::new(0.0, 0.0);
            for &(x, w) in GL10.iter() {
                coarse += w * f(mid + half * x);
            }
            let mut fine = Complex64::new(0.0, 0.0);
            let mut magnitude = 0.0;
            for &(x, w) in GL20.iter() {
                let v = f(mid + half * x);
                fine += w * v;
                magnitude += w * v.norm();
            }
            Panel {
                a,
                b,
                value: fine * half,
                error: ((fine - coarse) * half).norm(),
                magnitude: magnitude * half.abs(),
            }
        }
        QuadMethod::AdaptiveSimpson => {
            let h = b - a;
            let f0 = f(a);
            let f1 = f(a + 0.25 * h);
            let f2 = f(a + 0.5 * h);
            let f3 = f(a + 0.75 * h);
            let f4 = f(b);
            let coarse = (f0 + 4.0 * f2 + f4) * (h / 6.0);
            let fine = (f0 + 4.0 * f1 + 2.0 * f2 + 4.0 * f3 + f4) * (h / 12.0);
            let magnitude =
                (f0.norm() + 4.0 * f1.norm() + 2.0 * f2.norm() + 4.0 * f3.norm() + f4.norm())
                    * (h.abs() / 12.0);
            Panel {
                a,
                b,
                value: fine + (fine - coarse) / 15.0,
                error: (fine - coarse).norm() / 15.0,
                magnitude,
            }
        }
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    integrate_over(f, &[a, b], spec)
}

/// Integrate `f` over the interval spanned by `breakpoints`, seeding the
/// adaptive driver with one panel per consecutive pair.
pub fn integrate_over<F>(f: F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    if breakpoints.len() < 2 {
        return Ok(Estimate::zero());
    }
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut magnitude = 0.0;
    for w in breakpoints.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let p = panel_rule(&f, w[0], w[1], spec.method);
        total += p.value;
        err += p.error;
        magnitude += p.magnitude;
        heap.push(p);
    }
    let mut count = heap.len();
    loop {
        if !(err.is_finite() && total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::precision("non-finite integrand", f64::INFINITY));
        }
        let floor = 256.0 * f64::EPSILON * magnitude;
        if err <= spec.abs_tol || err <= floor {
            break;
        }
        if count >= spec.max_subdivisions {
            return Err(Error::precision(
                format!("quadrature budget of {} panels exhausted", spec.max_subdivisions),
                err,
            ));
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval cannot be split further in floating point.
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            err = heap.iter().map(|p| p.error).sum();
            continue;
        }
        let left = panel_rule(&f, worst.a, mid, spec.method);
        let right = panel_rule(&f, mid, worst.b, spec.method);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
        count += 1;
        if count % 64 == 0 {
            // Re-sum to shed accumulated cancellation in the running totals.
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(Estimate {
        value: total,
        error: err,
    })
}

/// Geometric breakpoints `[0, b·r^{levels}, …, b·r, b]`, used for integrands
/// with an integrable algebraic or logarithmic singularity at the origin.
pub fn graded_breakpoints(b: f64, ratio: f64, levels: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(levels + 2);
    pts.push(0.0);
    for k in (1..=levels).rev() {
        pts.push(b * ratio.powi(k as i32));
    }
    pts.push(b);
    pts
}

/// Fixed Gauss-Legendre rule on `[a, b]` (no error control).
pub fn gauss_legendre_fixed<F>(f: F, a: f64, b: f64, n: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let rule = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in rule.iter() {
        acc += w * f(mid + half * x);
    }
    acc * half
}

static GL10: LazyLock<Vec<(f64, f64)>> = LazyLock::new(|| legendre_rule(10));
static GL20: LazyLock<Vec<(f64, f64)>> = LazyLock::new(|| legendre_rule(20));

type RuleCache<K> = Mutex<HashMap<K, Arc<Vec<(f64, f64)>>>>;

static GL_CACHE: LazyLock<RuleCache<usize>> = LazyLock::new(|| Mutex::new(HashMap::new()));
static GJ_CACHE: LazyLock<RuleCache<(usize, u64, u64)>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Vec<(f64, f64)>> {
    let mut cache = GL_CACHE.lock().expect("rule cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| Arc::new(legendre_rule(n)))
        .clone()
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Weights `v_j` with `Σ v_j p(x_j) = ∫_x^1 p` for every polynomial `p` of
/// degree `< n`, where `x_j` are the `n`-point Gauss-Legendre nodes.
pub fn legendre_tail_weights(n: usize, x: f64) -> Vec<f64> {
    let rule = gauss_legendre(n);
    // ∫_x^1 P_0 = 1 - x, ∫_x^1 P_k = (P_{k-1}(x) - P_{k+1}(x)) / (2k + 1).
    let px = legendre_values(n + 1, x);
    let mut tail = vec![0.0; n];
    tail[0] = 1.0 - x;
    for k in 1..n {
        tail[k] = (px[k - 1] - px[k + 1]) / (2 * k + 1) as f64;
    }
    rule.iter()
        .map(|&(xj, wj)| {
            let pj = legendre_values(n - 1, xj);
            wj * (0..n).map(|k| (2 * k + 1) as f64 / 2.0 * pj[k] * tail[k]).sum::<f64>()
        })
        .collect()
}

/// `P_0(x), ..., P_m(x)`.
fn legendre_values(m: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(m + 1);
    p.push(1.0);
    if m >= 1 {
        p.push(x);
    }
    for k in 2..=m {
        let kf = k as f64;
        p.push(((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf);
    }
    p
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Jacobi nodes and weights on `[-1, 1]` for the weight
/// `(1 - x)^a (1 + x)^b`, computed with the Golub-Welsch eigenvalue method.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Arc<Vec<(f64, f64)>>> {
    if n < 1 || !(a > -1.0) || !(b > -1.0) {
        return Err(Error::domain(format!(
            "Gauss-Jacobi rule needs n >= 1 and exponents > -1 (got n={n}, a={a}, b={b})"
        )));
    }
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(rule) = GJ_CACHE.lock().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(jacobi_rule(n, a, b));
    GJ_CACHE
        .lock()
        .expect("rule cache poisoned")
        .insert(key, rule.clone());
    Ok(rule)
}

fn jacobi_rule(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let ab = a + b;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        m[(k, k)] = diag;
        if k + 1 < n {
            let j = (k + 1) as f64;
            let off = if k == 0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let s = 2.0 * j + ab;
                (4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma_real(a + 1.0)
        + ln_gamma_real(b + 1.0)
        - ln_gamma_real(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(m);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = gauss_legendre(12);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tail_weights_integrate_polynomials() {
        for &x in &[-1.0, -0.3, 0.2, 0.9, 1.0] {
            let v = legendre_tail_weights(10, x);
            let rule = gauss_legendre(10);
            let s: f64 = rule.iter().zip(&v).map(|(&(xj, _), &vj)| vj * xj.powi(9)).sum();
            let exact = (1.0 - x.powi(10)) / 10.0;
            assert!((s - exact).abs() < 1e-14, "x = {x}: {s} vs {exact}");
        }
    }

    #[test]
    fn jacobi_rule_matches_beta_moments() {
        // ∫(1-x)^a(1+x)^b x dx over the total mass equals (b-a)/(a+b+2).
        let (a, b) = (-0.5, 0.3);
        let rule = gauss_jacobi(20, a, b).unwrap();
        let mass: f64 = rule.iter().map(|&(_, w)| w).sum();
        let mean: f64 = rule.iter().map(|&(x, w)| w * x).sum::<f64>() / mass;
        assert!((mean - (b - a) / (a + b + 2.0)).abs() < 1e-13);
        let expected_mass = ((a + b + 1.0) * std::f64::consts::LN_2
            + ln_gamma_real(a + 1.0)
            + ln_gamma_real(b + 1.0)
            - ln_gamma_real(a + b + 2.0))
        .exp();
        assert!((mass - expected_mass).abs() < 1e-12);
    }

    #[test]
    fn jacobi_rule_handles_exponent_sum_minus_one() {
        let rule = gauss_jacobi(8, -0.5, -0.5).unwrap();
        let mass: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((mass - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn adaptive_drivers_agree_on_smooth_integrand() {
        let spec = QuadratureSpec::default();
        let g = integrate(|x| c((-x * x).exp()), 0.0, 6.0, &spec).unwrap();
        let expected = 0.5 * std::f64::consts::PI.sqrt();
        assert!((g.value.re - expected).abs() < 1e-12);

        let simpson = QuadratureSpec {
            method: QuadMethod::AdaptiveSimpson,
            abs_tol: 1e-10,
            max_subdivisions: 100_000,
            ..spec
        };
        let s = integrate(|x| c((-x * x).exp()), 0.0, 6.0, &simpson).unwrap();
        assert!((s.value.re - expected).abs() < 1e-9);
    }

    #[test]
    fn graded_mesh_resolves_root_singularity() {
        let spec = QuadratureSpec::default();
        let pts = graded_breakpoints(1.0, 0.5, 40);
        let r = integrate_over(|x| c(x.sqrt().ln()), &pts, &spec).unwrap();
        assert!((r.value.re + 0.5).abs() < 1e-11);
    }

    #[test]
    fn budget_exhaustion_is_a_precision_error() {
        let spec = QuadratureSpec {
            max_subdivisions: 3,
            ..QuadratureSpec::default()
        };
        let r = integrate(|x| c((50.0 * x).sin() / x.sqrt()), 1e-9, 3.0, &spec);
        assert!(matches!(r, Err(Error::Precision { .. })));
    }
}
