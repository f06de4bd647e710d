use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tie tolerance used when classifying `|Im λ|` against `ρ`.
pub const STRIP_TIE_TOL: f64 = 1e-12;

/// Jacobi parameters `(α, β)` with `α ≥ β ≥ -1/2`, `α ≠ -1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawParams> for JacobiParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        JacobiParams::new(r.alpha, r.beta)
    }
}

impl From<JacobiParams> for RawParams {
    fn from(p: JacobiParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::domain("Jacobi parameters must be finite"));
        }
        if !(alpha >= beta && beta >= -0.5) || alpha == -0.5 {
            return Err(Error::domain(format!(
                "need alpha >= beta >= -1/2 and alpha != -1/2 (got alpha = {alpha}, beta = {beta})"
            )));
        }
        let p = Self { alpha, beta };
        debug_assert!(p.rho() > 0.0);
        Ok(p)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho(&self) -> f64 {
        self.alpha + self.beta + 1.0
    }

    /// The parameters `(α + 1, β + 1)` appearing in derivative formulas.
    pub fn shifted(&self) -> Self {
        Self {
            alpha: self.alpha + 1.0,
            beta: self.beta + 1.0,
        }
    }
}

/// Position of a spectral parameter relative to the strip `|Im λ| ≤ ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StripRegion {
    Interior,
    Boundary,
    Exterior,
}

/// A complex spectral parameter λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralPoint(pub Complex64);

impl SpectralPoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn real(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    pub fn imag(y: f64) -> Self {
        Self::new(0.0, y)
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn region(&self, params: &JacobiParams) -> StripRegion {
        let gap = self.0.im.abs() - params.rho();
        if gap.abs() <= STRIP_TIE_TOL {
            StripRegion::Boundary
        } else if gap < 0.0 {
            StripRegion::Interior
        } else {
            StripRegion::Exterior
        }
    }

    /// In the closed strip `S₁`.
    pub fn in_strip(&self, params: &JacobiParams) -> bool {
        self.region(params) != StripRegion::Exterior
    }
}

impl From<Complex64> for SpectralPoint {
    fn from(z: Complex64) -> Self {
        Self(z)
    }
}

impl From<f64> for SpectralPoint {
    fn from(x: f64) -> Self {
        Self::real(x)
    }
}

impl std::ops::Neg for SpectralPoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_pairs() {
        assert!(JacobiParams::new(-0.5, -0.5).is_err());
        assert!(JacobiParams::new(0.0, 0.5).is_err());
        assert!(JacobiParams::new(1.0, -0.6).is_err());
        let p = JacobiParams::new(0.5, -0.5).unwrap();
        assert_eq!(p.rho(), 1.0);
    }

    #[test]
    fn classification() {
        let p = JacobiParams::new(1.0, 0.0).unwrap();
        assert_eq!(SpectralPoint::new(3.0, 1.0).region(&p), StripRegion::Interior);
        assert_eq!(SpectralPoint::new(3.0, -2.0).region(&p), StripRegion::Boundary);
        assert_eq!(SpectralPoint::new(0.0, 2.0 + 5e-13).region(&p), StripRegion::Boundary);
        assert_eq!(SpectralPoint::new(0.0, 2.0 + 1e-9).region(&p), StripRegion::Exterior);
    }

    #[test]
    fn serde_validates() {
        let ok: JacobiParams = serde_json::from_str(r#"{"alpha":1.0,"beta":0.0}"#).unwrap();
        assert_eq!(ok.rho(), 2.0);
        assert!(serde_json::from_str::<JacobiParams>(r#"{"alpha":0.0,"beta":1.0}"#).is_err());
    }
}
