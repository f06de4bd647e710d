use hyperjacobi::jacobi::phi;
use hyperjacobi::transform::{forward_transform, forward_transform_measure};
use hyperjacobi::translation::translate;
use hyperjacobi::{EvenMeasure, FnEven, JacobiParams, QuadratureSpec, SpectralPoint};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = JacobiParams> {
    (-0.4f64..2.5, 0.0f64..1.0).prop_map(|(a, frac)| JacobiParams::new(a, -0.5 + frac * (a + 0.5)).unwrap())
}

fn gaussian(width: f64) -> impl Fn(f64) -> Complex64 + Sync + Copy {
    move |t: f64| Complex64::new((-(t / width).powi(2)).exp(), 0.0)
}

fn bump(t: f64) -> Complex64 {
    Complex64::new((1.0 - t * t).max(0.0).powi(6), 0.0)
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::with_tol(1e-11)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn linear_in_the_function(
        p in params(),
        a in (-2.0f64..2.0, -2.0f64..2.0),
        b in (-2.0f64..2.0, -2.0f64..2.0),
        re in 0.0f64..6.0,
        frac in -1.0f64..1.0,
    ) {
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let l = SpectralPoint::new(re, frac * p.rho());
        let (f, g) = (gaussian(0.7), gaussian(1.3));
        let fs = FnEven::with_support(f, 8.0);
        let gs = FnEven::with_support(g, 12.0);
        let sum = FnEven::with_support(move |t: f64| a * f(t) + b * g(t), 12.0);
        let lhs = forward_transform(&p, &sum, l, &quad()).unwrap();
        let rhs = a * forward_transform(&p, &fs, l, &quad()).unwrap() + b * forward_transform(&p, &gs, l, &quad()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + lhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn even_in_lambda(p in params(), re in -6.0f64..6.0, frac in -1.0f64..1.0) {
        let l = SpectralPoint::new(re, frac * p.rho());
        let f = FnEven::with_support(bump, 1.0);
        let a = forward_transform(&p, &f, l, &quad()).unwrap();
        let b = forward_transform(&p, &f, -l, &quad()).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn atom_at_origin_transforms_to_one(p in params(), re in -6.0f64..6.0, frac in -1.0f64..1.0) {
        let l = SpectralPoint::new(re, frac * p.rho());
        let v = forward_transform_measure(&p, &EvenMeasure::dirac0(), l, &quad()).unwrap();
        prop_assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn transform_at_i_rho_is_the_mass(p in params(), w in 0.0f64..1.0, t0 in 0.1f64..3.0, t1 in 3.5f64..5.0) {
        let mu = EvenMeasure::new(
            Complex64::new(w, 0.0),
            vec![(t0, Complex64::new(0.3, 0.1)), (t1, Complex64::new(1.0 - w, -0.4))],
            None,
        ).unwrap();
        let mass = mu.mass(&p, &quad()).unwrap();
        let v = forward_transform_measure(&p, &mu, SpectralPoint::imag(p.rho()), &quad()).unwrap();
        prop_assert!((v - mass).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn translate_multiplies_the_transform(p in params(), s in 0.1f64..1.0, re in 0.0f64..3.0, frac in -0.8f64..0.8) {
        let l = SpectralPoint::new(re, frac * p.rho());
        let q = QuadratureSpec::with_tol(1e-9);
        // Δ grows like e^{2ρt} on the support, so the inner translates need a
        // tighter absolute target than the outer integral.
        let inner = QuadratureSpec::with_tol((1e-9 * (-2.0 * p.rho() * (1.0 + s)).exp()).max(1e-11));
        // The declared support leaves room for translates; the bump vanishes past 1.
        let f = FnEven::with_support(bump, 3.0);
        let moved = FnEven::with_support(|t: f64| translate(&p, &f, s, t, &inner).unwrap(), 1.0 + s);
        let lhs = forward_transform(&p, &moved, l, &q).unwrap();
        let rhs = phi(&p, l, s).unwrap() * forward_transform(&p, &f, l, &q).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-4 * rhs.norm().max(1.0), "{lhs} vs {rhs}");
    }
}
