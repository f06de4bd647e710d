use hyperjacobi::special::{euler_integral_2f1, gauss_2f1, HypergeometricArgs};
use hyperjacobi::QuadratureSpec;
use num_complex::Complex64;
use proptest::prelude::*;

const SERIES_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-11;

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.5f64..2.5, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn series_matches_euler_integral(
        a in complex(),
        b in 0.2f64..3.0,
        gap in 0.2f64..3.0,
        z in -50.0f64..0.99,
    ) {
        let args = HypergeometricArgs::new(a, b, b + gap, z);
        let series = gauss_2f1(&args, SERIES_TOL).unwrap();
        let euler = euler_integral_2f1(&args, &QuadratureSpec::with_tol(QUAD_TOL)).unwrap();
        let bound = 10.0 * (SERIES_TOL + QUAD_TOL) * series.norm().max(1.0);
        prop_assert!((series - euler).norm() <= bound, "{series} vs {euler}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn symmetric_in_the_numerator_parameters(a in complex(), b in complex(), c in 0.2f64..4.0, z in -20.0f64..0.95) {
        let ab = gauss_2f1(&HypergeometricArgs::new(a, b, c, z), SERIES_TOL).unwrap();
        let ba = gauss_2f1(&HypergeometricArgs::new(b, a, c, z), SERIES_TOL).unwrap();
        prop_assert!((ab - ba).norm() <= 1e-11 * ab.norm().max(1.0));
    }

    #[test]
    fn vanishing_numerator_gives_one(a in complex(), c in 0.1f64..5.0, z in -100.0f64..0.999) {
        let v = gauss_2f1(&HypergeometricArgs::new(a, 0.0, c, z), SERIES_TOL).unwrap();
        prop_assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn conjugate_parameters_conjugate_the_value(a in complex(), b in complex(), c in 0.2f64..4.0, z in -20.0f64..0.95) {
        let v = gauss_2f1(&HypergeometricArgs::new(a, b, c, z), SERIES_TOL).unwrap();
        let w = gauss_2f1(&HypergeometricArgs::new(a.conj(), b.conj(), c, z), SERIES_TOL).unwrap();
        prop_assert!((v.conj() - w).norm() <= 1e-12 * v.norm().max(1.0));
    }
}
