use hyperjacobi::furstenberg::{flatness, iterate_and_report};
use hyperjacobi::jacobi::phi;
use hyperjacobi::transform::forward_transform_measure;
use hyperjacobi::{EvenMeasure, GridFunction, Interpolation, JacobiParams, QuadratureSpec, SpectralPoint};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn eigenfunctions_decay_geometrically() {
    let p = JacobiParams::new(1.0, 0.0).unwrap();
    let quad = QuadratureSpec::with_tol(1e-11);
    let mu = EvenMeasure::pair(0.5).unwrap();
    for k in 0..10 {
        let l = SpectralPoint::real(0.5 + 0.6 * k as f64);
        let f = GridFunction::try_from_fn(5.0, 501, Interpolation::Cubic, |t| phi(&p, l, t)).unwrap();
        let run = iterate_and_report(&p, &f, &mu, 5, &[l.0.re], &quad).unwrap();
        let m = run.report.probes[0].muhat;
        for (n, it) in run.iterates.iter().enumerate().skip(1) {
            let err = it
                .samples()
                .map(|(t, v)| (v - m.powi(n as i32) * phi(&p, l, t).unwrap()).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-3 * n as f64, "λ = {}, n = {n}: {err}", l.0);
        }
        for w in run.report.steps.windows(2) {
            assert!(w[1].valid_tmax < w[0].valid_tmax);
            assert!((w[0].valid_tmax - w[1].valid_tmax - mu.reach()).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn lazy_walks_flatten_bumps(a in 0.0f64..2.0, frac in 0.0f64..1.0, w in 0.05f64..0.9, t0 in 0.3f64..1.0) {
        let p = JacobiParams::new(a, -0.5 + frac * (a + 0.5)).unwrap();
        let quad = QuadratureSpec::with_tol(1e-10);
        let mu = EvenMeasure::new(Complex64::new(w, 0.0), vec![(t0, Complex64::new(1.0 - w, 0.0))], None).unwrap();
        let f = GridFunction::from_fn(6.0, 301, Interpolation::Cubic, |t| {
            Complex64::new((1.0 - (t / 1.5).powi(2)).max(0.0).powi(4), 0.0)
        }).unwrap();
        let run = iterate_and_report(&p, &f, &mu, 5, &[], &quad).unwrap();
        prop_assert!(run.report.flatness_strictly_decreasing, "{:?}", run.report.steps);
        prop_assert!(run.report.steps.iter().all(|s| s.flatness >= 0.0));
        prop_assert_eq!(flatness(&run.iterates[0]), run.report.steps[0].flatness);
    }

    #[test]
    fn transform_at_i_rho_is_the_mass(a in 0.0f64..2.0, frac in 0.0f64..1.0, w in 0.0f64..1.0, t0 in 0.1f64..4.0) {
        let p = JacobiParams::new(a, -0.5 + frac * (a + 0.5)).unwrap();
        let quad = QuadratureSpec::with_tol(1e-12);
        let mu = EvenMeasure::new(Complex64::new(w, 0.0), vec![(t0, Complex64::new(1.0 - w, 0.0))], None).unwrap();
        let v = forward_transform_measure(&p, &mu, SpectralPoint::imag(p.rho()), &quad).unwrap();
        prop_assert!((v - mu.mass(&p, &quad).unwrap()).norm() <= 1e-12);
    }
}

/// `1.5δ₀ - 0.5δ_{±1}` has unit mass but `μ̂ = 1.5 - 0.5φ_λ(1) > 1` on the
/// real line, so oscillating functions grow instead of flattening.
#[test]
fn signed_measure_breaks_the_flattening() {
    let p = JacobiParams::new(1.0, 0.0).unwrap();
    let quad = QuadratureSpec::with_tol(1e-10);
    let mu = EvenMeasure::new(Complex64::new(1.5, 0.0), vec![(1.0, Complex64::new(-0.5, 0.0))], None).unwrap();
    let l = SpectralPoint::real(3.0);
    let f = GridFunction::try_from_fn(6.0, 601, Interpolation::Cubic, |t| phi(&p, l, t)).unwrap();
    let run = iterate_and_report(&p, &f, &mu, 4, &[3.0], &quad).unwrap();
    assert!(run.report.probes[0].muhat.re > 1.0);
    assert!(run.report.flatness_non_decreasing, "{:?}", run.report.steps);
    assert!(!run.report.flatness_strictly_decreasing);
}
