use num_complex::Complex64;

/// Significant digits implied by a tolerance: `1e-6` gives six.
pub fn digits_for(tol: f64) -> usize {
    ((-tol.log10()).ceil() as i64).clamp(1, 17) as usize
}

/// Shortest decimal for `x` rounded to `digits` significant digits; `-0`
/// prints as `0`.
pub fn number(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().expect("float formatting roundtrips");
    if rounded == 0.0 {
        return "0".into();
    }
    let a = rounded.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Real and imaginary parts, dropping a part that is below `tol` relative to
/// the modulus.
pub fn complex(z: Complex64, tol: f64, digits: usize) -> (String, String) {
    let scale = z.norm();
    let clean = |v: f64| if v.abs() <= tol * scale { 0.0 } else { v };
    (number(clean(z.re), digits), number(clean(z.im), digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_and_cleanup() {
        assert_eq!(digits_for(1e-6), 6);
        assert_eq!(number(0.38686939, 6), "0.386869");
        assert_eq!(number(-0.0, 6), "0");
        assert_eq!(number(0.9999999999999998, 6), "1");
        assert_eq!(number(-2.0, 6), "-2");
        assert_eq!(number(1.234567e-9, 3), "1.23e-9");
        let (re, im) = complex(Complex64::new(0.386869391, 3e-17), 1e-6, 6);
        assert_eq!((re.as_str(), im.as_str()), ("0.386869", "0"));
    }
}
