use hyperjacobi::jacobi::phi;
use hyperjacobi::resolvent::{b_lambda, ResolventKernel, TLambdaProfile};
use hyperjacobi::translation::translate;
use hyperjacobi::verify::standard_params;
use hyperjacobi::{FnEven, JacobiParams, QuadratureSpec, SpectralPoint};
use num_complex::Complex64;
use proptest::prelude::*;

fn standard() -> impl Strategy<Value = JacobiParams> {
    (0usize..3).prop_map(|k| standard_params()[k])
}

fn bump(t: f64) -> Complex64 {
    Complex64::new((1.0 - t * t).max(0.0).powi(4), 0.0)
}

#[test]
fn translated_kernel_factorizes() {
    let quad = QuadratureSpec::with_tol(1e-10);
    for p in standard_params() {
        let l = SpectralPoint::imag(p.rho() + 0.5);
        let k = ResolventKernel::new(&p, l).unwrap();
        let b = FnEven::new(move |t: f64| k.value(t).unwrap_or_default());
        for (s, t) in [(0.3, 1.2), (1.2, 0.3), (0.5, 2.0)] {
            let lhs = translate(&p, &b, s, t, &quad).unwrap();
            let (far, near) = if t > s { (t, s) } else { (s, t) };
            let rhs = k.value(far).unwrap() * phi(&p, l, near).unwrap();
            assert!((lhs - rhs).norm() <= 1e-4 * rhs.norm().max(1.0), "(s, t) = ({s}, {t}): {lhs} vs {rhs}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn kernel_is_even(p in standard(), re in -3.0f64..3.0, extra in 0.05f64..3.0, t in 0.01f64..8.0) {
        let l = SpectralPoint::new(re, p.rho() + extra);
        prop_assert_eq!(b_lambda(&p, l, t).unwrap(), b_lambda(&p, l, -t).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn t_lambda_norm_is_finite_inside_the_strip(p in standard(), frac in 0.1f64..0.9, re in 0.0f64..4.0) {
        let y = frac * p.rho();
        let x = re.max((0.25 * p.rho() * p.rho() - y * y).max(0.0).sqrt());
        let l = SpectralPoint::new(x, y);
        prop_assume!(l.0.norm() >= p.rho() / 2.0);
        let f = FnEven::with_support(bump, 1.0);
        let norm = TLambdaProfile::new(&p, &f, l).unwrap().l1_norm();
        prop_assert!(norm.is_finite() && norm > 0.0, "‖T_λ f‖₁ = {norm}");
    }
}
