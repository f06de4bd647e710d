use hyperjacobi::translation::translate;
use hyperjacobi::verify::regime_params;
use hyperjacobi::{FnEven, JacobiParams, QuadratureSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn regime() -> impl Strategy<Value = JacobiParams> {
    (0usize..3).prop_map(|k| regime_params()[k])
}

fn sample(t: f64) -> Complex64 {
    Complex64::new((-t * t).exp() * (1.0 + 0.3 * t * t), 0.2 * (-0.5 * t * t).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn constants_have_unit_mass(p in regime(), s in 0.0f64..4.0, t in 0.0f64..4.0) {
        let one = FnEven::new(|_| Complex64::new(1.0, 0.0));
        let v = translate(&p, &one, s, t, &QuadratureSpec::with_tol(1e-12)).unwrap();
        prop_assert!((v - 1.0).norm() <= 1e-8, "{v}");
    }

    #[test]
    fn even_in_the_shift(p in regime(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let f = FnEven::new(sample);
        let q = QuadratureSpec::with_tol(1e-8);
        let a = translate(&p, &f, s, t, &q).unwrap();
        prop_assert_eq!(a, translate(&p, &f, -s, t, &q).unwrap());
        prop_assert_eq!(a, translate(&p, &f, s, -t, &q).unwrap());
    }

    #[test]
    fn symmetric_in_its_arguments(p in regime(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let f = FnEven::new(sample);
        let q = QuadratureSpec::with_tol(1e-8);
        let a = translate(&p, &f, s, t, &q).unwrap();
        let b = translate(&p, &f, t, s, &q).unwrap();
        prop_assert!((a - b).norm() <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn translations_commute(p in regime(), s in 0.1f64..1.5, t in 0.1f64..1.5, x in 0.0f64..1.5) {
        let q = QuadratureSpec::with_tol(1e-8);
        let f = FnEven::new(sample);
        let by_t = FnEven::new(|y: f64| translate(&p, &f, t, y, &q).unwrap());
        let by_s = FnEven::new(|y: f64| translate(&p, &f, s, y, &q).unwrap());
        let st = translate(&p, &by_t, s, x, &q).unwrap();
        let ts = translate(&p, &by_s, t, x, &q).unwrap();
        prop_assert!((st - ts).norm() <= 1e-4, "{st} vs {ts}");
    }
}
