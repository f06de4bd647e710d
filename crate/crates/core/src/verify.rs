//! Named invariant suites with JSON reports, shared by the command line and
//! the acceptance tests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FnEven;
use crate::jacobi::{c_function, phi, phi_dx_at_rho};
use crate::params::{JacobiParams, SpectralPoint};
use crate::quadrature::QuadratureSpec;
use crate::resolvent::{b_hat, t_lambda, t_lambda_spectral, wronskian_bracket, TLambdaProfile};
use crate::tauberian::resolvent_transform;
use crate::transform::{forward_transform, riemann_lebesgue_check};
use crate::translation::{l10_defect, translate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    #[serde(rename = "lemma31")]
    KernelTransform,
    Wronskian,
    ProductFormula,
    StrictBound,
    DerivativePositivity,
    Tlambda,
    ResolventGlue,
    RiemannLebesgue,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::KernelTransform,
        Suite::Wronskian,
        Suite::ProductFormula,
        Suite::StrictBound,
        Suite::DerivativePositivity,
        Suite::Tlambda,
        Suite::ResolventGlue,
        Suite::RiemannLebesgue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::KernelTransform => "lemma31",
            Suite::Wronskian => "wronskian",
            Suite::ProductFormula => "product-formula",
            Suite::StrictBound => "strict-bound",
            Suite::DerivativePositivity => "derivative-positivity",
            Suite::Tlambda => "tlambda",
            Suite::ResolventGlue => "resolvent-glue",
            Suite::RiemannLebesgue => "riemann-lebesgue",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite '{s}'")))
    }
}

/// Inputs shared by all suites.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Restrict to one parameter pair; `None` runs the standard three.
    pub params: Option<JacobiParams>,
    pub seed: u64,
    pub quad: QuadratureSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            params: None,
            seed: 0,
            quad: QuadratureSpec::with_tol(1e-11),
        }
    }
}

impl VerifyConfig {
    fn param_sets(&self) -> Vec<JacobiParams> {
        match self.params {
            Some(p) => vec![p],
            None => standard_params(),
        }
    }
}

/// `(1/2, -1/2)`, `(1, 0)` and `(2.3, 0.7)`.
pub fn standard_params() -> Vec<JacobiParams> {
    [(0.5, -0.5), (1.0, 0.0), (2.3, 0.7)]
        .into_iter()
        .map(|(a, b)| JacobiParams::new(a, b).expect("valid parameters"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: usize,
    /// The drawn or fixed inputs, in words.
    pub input: String,
    pub err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub cases: Vec<CaseRecord>,
    pub max_err: f64,
    pub pass: bool,
    /// Suite-specific summary numbers.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, f64>,
}

impl VerifyReport {
    fn new(suite: Suite, cases: Vec<CaseRecord>) -> Self {
        let max_err = cases.iter().map(|c| c.err).fold(0.0, f64::max);
        let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
        Self {
            suite,
            cases,
            max_err,
            pass,
            notes: BTreeMap::new(),
        }
    }
}

/// Tolerances of the suites.
pub mod tol {
    pub const KERNEL_TRANSFORM_REL: f64 = 1e-5;
    pub const WRONSKIAN_REL: f64 = 1e-5;
    pub const PRODUCT_FORMULA: f64 = 1e-5;
    pub const DERIVATIVE_HALVING: f64 = 1e-5;
    pub const TLAMBDA_IDENTITY: f64 = 1e-4;
    pub const TLAMBDA_FORMULAS: f64 = 1e-3;
    pub const GLUE_EXTERIOR: f64 = 1e-5;
    pub const GLUE_INTERIOR: f64 = 1e-3;
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<VerifyReport> {
    match suite {
        Suite::KernelTransform => kernel_transform(config),
        Suite::Wronskian => wronskian(config),
        Suite::ProductFormula => product_formula(config),
        Suite::StrictBound => strict_bound(config),
        Suite::DerivativePositivity => derivative_positivity(config),
        Suite::Tlambda => tlambda(config),
        Suite::ResolventGlue => resolvent_glue(config),
        Suite::RiemannLebesgue => riemann_lebesgue(config),
    }
}

fn ab(p: &JacobiParams) -> String {
    format!("(α, β) = ({}, {})", p.alpha(), p.beta())
}

/// Smooth even bump `(1 - t²)⁴` on `[-1, 1]`.
pub fn smooth_bump(t: f64) -> Complex64 {
    if t.abs() >= 1.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new((1.0 - t * t).powi(4), 0.0)
    }
}

/// `bump(t) - c·bump(2t)` with `c` chosen so that `∫ f Δ = 0`.
pub fn augmentation_member(params: &JacobiParams, quad: &QuadratureSpec) -> Result<FnEven<impl Fn(f64) -> Complex64 + Sync>> {
    let wide = FnEven::with_support(smooth_bump, 1.0);
    let narrow = FnEven::with_support(|t: f64| smooth_bump(2.0 * t), 0.5);
    let c = l10_defect(params, &wide, quad)? / l10_defect(params, &narrow, quad)?;
    Ok(FnEven::with_support(move |t: f64| smooth_bump(t) - c * smooth_bump(2.0 * t), 1.0))
}

fn kernel_transform(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut cases = Vec::new();
    for p in config.param_sets() {
        let rho = p.rho();
        let lambdas = [
            SpectralPoint::imag(rho + 0.5),
            SpectralPoint::imag(2.0 * rho),
            SpectralPoint::new(1.0, rho + 0.3),
        ];
        for l in lambdas {
            for xi in [0.0, 0.5, 1.0, 2.0, 5.0] {
                let got = b_hat(&p, l, SpectralPoint::real(xi), &config.quad)?.value;
                let exact = 1.0 / (xi * xi - l.0 * l.0);
                let err = (got - exact).norm() / exact.norm();
                cases.push(CaseRecord {
                    id: cases.len(),
                    input: format!("{}, λ = {}, ξ = {xi}", ab(&p), l.0),
                    err,
                    pass: err <= tol::KERNEL_TRANSFORM_REL,
                });
            }
        }
    }
    Ok(VerifyReport::new(Suite::KernelTransform, cases))
}

fn wronskian(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sets = config.param_sets();
    let ts = [0.3, 0.7, 1.5, 3.0];
    let mut cases = Vec::new();
    for k in 0..6 {
        let p = sets[k % sets.len()];
        let l = SpectralPoint::new(rng.gen_range(0.3..3.0), rng.gen_range(-0.8..0.8) * p.rho());
        let expected = 2.0 * Complex64::i() * l.0 * c_function(&p, -l)?;
        let values = ts
            .iter()
            .map(|&t| wronskian_bracket(&p, l, t))
            .collect::<Result<Vec<_>>>()?;
        let mean = values.iter().sum::<Complex64>() / values.len() as f64;
        let spread = (values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / values.len() as f64).sqrt() / mean.norm();
        let value_err = values.iter().map(|v| (v - expected).norm()).fold(0.0, f64::max) / expected.norm();
        let err = spread.max(value_err);
        cases.push(CaseRecord {
            id: k,
            input: format!("{}, λ = {}", ab(&p), l.0),
            err,
            pass: err <= tol::WRONSKIAN_REL,
        });
    }
    Ok(VerifyReport::new(Suite::Wronskian, cases))
}

/// One parameter pair per kernel regime.
pub fn regime_params() -> Vec<JacobiParams> {
    [(1.0, 0.5), (0.7, 0.7), (1.2, -0.5)]
        .into_iter()
        .map(|(a, b)| JacobiParams::new(a, b).expect("valid parameters"))
        .collect()
}

fn product_formula(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sets = match config.params {
        Some(p) => vec![p],
        None => regime_params(),
    };
    let mut cases = Vec::new();
    for k in 0..30 {
        let p = sets[k % sets.len()];
        let l = SpectralPoint::new(rng.gen_range(0.0..4.0), rng.gen_range(-1.0..1.0) * p.rho());
        let s = rng.gen_range(0.05..2.0);
        let t = rng.gen_range(0.05..2.0);
        let f = FnEven::new(move |x: f64| phi(&p, l, x).unwrap_or(Complex64::new(f64::NAN, 0.0)));
        let got = translate(&p, &f, s, t, &config.quad)?;
        let exact = phi(&p, l, s)? * phi(&p, l, t)?;
        let err = (got - exact).norm();
        cases.push(CaseRecord {
            id: k,
            input: format!("{}, λ = {}, s = {s:.6}, t = {t:.6}", ab(&p), l.0),
            err,
            pass: err <= tol::PRODUCT_FORMULA,
        });
    }
    Ok(VerifyReport::new(Suite::ProductFormula, cases))
}

/// Twenty spectral points of the closed strip, none at `±iρ`.
pub fn strip_sample(rho: f64) -> Vec<SpectralPoint> {
    let mut out = Vec::with_capacity(20);
    for &y in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
        for &x in &[0.0, 0.4, 1.5, 6.0] {
            let l = SpectralPoint::new(x, y * rho);
            if x == 0.0 && y.abs() == 1.0 {
                // ±iρ itself is excluded; take a nearby boundary point.
                out.push(SpectralPoint::new(0.1, y * rho));
            } else {
                out.push(l);
            }
        }
    }
    out
}

fn strict_bound(config: &VerifyConfig) -> Result<VerifyReport> {
    let ts: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
    let mut cases = Vec::new();
    let mut min_margin = f64::INFINITY;
    for p in config.param_sets() {
        for l in strip_sample(p.rho()) {
            let mut worst = 0.0f64;
            for &t in &ts {
                worst = worst.max(phi(&p, l, t)?.norm());
            }
            let margin = 1.0 - worst;
            min_margin = min_margin.min(margin);
            cases.push(CaseRecord {
                id: cases.len(),
                input: format!("{}, λ = {}, t ∈ (0, 5]", ab(&p), l.0),
                err: (-margin).max(0.0),
                pass: margin > 0.0,
            });
        }
    }
    let mut report = VerifyReport::new(Suite::StrictBound, cases);
    report.notes.insert("min_margin".into(), min_margin);
    Ok(report)
}

fn derivative_positivity(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut cases = Vec::new();
    let mut min_value = f64::INFINITY;
    for p in config.param_sets() {
        for t in [0.5, 1.0, 2.0, 5.0] {
            let d = phi_dx_at_rho(&p, t)?;
            min_value = min_value.min(d.value);
            let err = d.halving_change;
            cases.push(CaseRecord {
                id: cases.len(),
                input: format!("{}, t = {t}, derivative = {:.9e}", ab(&p), d.value),
                err,
                pass: d.value > 0.0 && err <= tol::DERIVATIVE_HALVING,
            });
        }
    }
    let mut report = VerifyReport::new(Suite::DerivativePositivity, cases);
    report.notes.insert("min_derivative".into(), min_value);
    Ok(report)
}

fn tlambda(config: &VerifyConfig) -> Result<VerifyReport> {
    let f = FnEven::with_support(smooth_bump, 1.0);
    let quad = &config.quad;
    let mut cases = Vec::new();
    let sets = config.param_sets();
    let p = sets[sets.len().min(2) - 1];
    let rho = p.rho();
    let lambdas = [
        SpectralPoint::new(0.7, 0.4 * rho),
        SpectralPoint::new(1.5, 0.2 * rho),
        SpectralPoint::new(0.6, 0.8 * rho),
    ];
    for l in lambdas {
        let profile = TLambdaProfile::new(&p, &f, l)?;
        let fl = forward_transform(&p, &f, l, quad)?;
        for xi in [0.0, 1.0, 3.0] {
            let x = SpectralPoint::real(xi);
            let lhs = profile.transform(x)?;
            let rhs = (fl - forward_transform(&p, &f, x, quad)?) / (xi * xi - l.0 * l.0);
            let err = (lhs - rhs).norm();
            cases.push(CaseRecord {
                id: cases.len(),
                input: format!("{}, transform identity at λ = {}, ξ = {xi}", ab(&p), l.0),
                err,
                pass: err <= tol::TLAMBDA_IDENTITY,
            });
        }
    }
    let l = lambdas[0];
    let ts = [0.25, 0.5, 0.75];
    let spectral = t_lambda_spectral(&p, &f, l, &ts, quad, 40.0)?;
    for (&t, s) in ts.iter().zip(spectral) {
        let direct = t_lambda(&p, &f, l, t, quad)?;
        let err = (direct - s).norm();
        cases.push(CaseRecord {
            id: cases.len(),
            input: format!("{}, one-dimensional vs spectral form at λ = {}, t = {t}", ab(&p), l.0),
            err,
            pass: err <= tol::TLAMBDA_FORMULAS,
        });
    }
    Ok(VerifyReport::new(Suite::Tlambda, cases))
}

fn resolvent_glue(config: &VerifyConfig) -> Result<VerifyReport> {
    let quad = &config.quad;
    let one = FnEven::new(|_| Complex64::new(1.0, 0.0));
    let mut cases = Vec::new();
    for p in config.param_sets() {
        let f = augmentation_member(&p, quad)?;
        let rho = p.rho();
        let exact = |l: SpectralPoint| -1.0 / (l.0 * l.0 + rho * rho);
        let exterior = [
            SpectralPoint::imag(rho + 0.5),
            SpectralPoint::imag(2.0 * rho),
            SpectralPoint::new(1.0, rho + 0.3),
        ];
        let interior = [
            SpectralPoint::imag(0.8 * rho),
            SpectralPoint::new(0.7, 0.4 * rho),
            SpectralPoint::new(2.0, 0.5 * rho),
        ];
        for (set, bound, label) in [
            (&exterior, tol::GLUE_EXTERIOR, "exterior"),
            (&interior, tol::GLUE_INTERIOR, "interior"),
        ] {
            for &l in set.iter() {
                let got = resolvent_transform(&p, &one, &f, l, quad)?;
                let err = (got - exact(l)).norm();
                cases.push(CaseRecord {
                    id: cases.len(),
                    input: format!("{}, {label} λ = {}", ab(&p), l.0),
                    err,
                    pass: err <= bound,
                });
            }
        }
    }
    Ok(VerifyReport::new(Suite::ResolventGlue, cases))
}

/// Increasing real `λ` used for decay checks.
pub const RIEMANN_LEBESGUE_LAMBDAS: [f64; 5] = [10.0, 20.0, 40.0, 60.0, 80.0];

fn riemann_lebesgue(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut cases = Vec::new();
    for p in config.param_sets() {
        // The cusp e^{-a|t|} has a transform that decays without oscillating;
        // a = ρ + 2 keeps fΔφ_λ integrable, and e^{-2t} is negligible past 25.
        let a = p.rho() + 2.0;
        let f = FnEven::with_support(move |t: f64| Complex64::new((-a * t.abs()).exp(), 0.0), 25.0);
        let r = riemann_lebesgue_check(&p, &f, &RIEMANN_LEBESGUE_LAMBDAS, &config.quad)?;
        let worst = r
            .magnitudes
            .windows(2)
            .map(|w| (w[1] / w[0] - 1.0).max(-1.0))
            .fold(-1.0, f64::max);
        cases.push(CaseRecord {
            id: cases.len(),
            input: format!("{}, |f̂(λ)| = {:?}", ab(&p), r.magnitudes),
            err: (worst + 1.0).max(0.0),
            pass: r.decreasing_from(10.0),
        });
    }
    Ok(VerifyReport::new(Suite::RiemannLebesgue, cases))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let c = VerifyConfig {
            params: Some(JacobiParams::new(1.0, 0.0).unwrap()),
            seed: 7,
            ..VerifyConfig::default()
        };
        let a = run_suite(Suite::Wronskian, &c).unwrap();
        let b = run_suite(Suite::Wronskian, &c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.pass, "{a:?}");
    }
}
