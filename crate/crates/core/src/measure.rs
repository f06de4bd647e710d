//! Even complex measures: an atom at the origin, symmetric atom pairs and an
//! optional density on a grid.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EvenFunction, GridFunction};
use crate::jacobi::weight_delta;
use crate::params::JacobiParams;
use crate::quadrature::{integrate_over, QuadratureSpec};
use crate::transform::Failure;

/// Which measure the density samples are taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DensityReference {
    /// `dμ = d(|t|) dt`.
    #[default]
    Lebesgue,
    /// `dμ = d(|t|) Δ(t) dt`.
    DeltaWeighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub grid: GridFunction,
    pub reference: DensityReference,
}

/// `atom0·δ₀ + Σ w_j (δ_{t_j} + δ_{-t_j})/2 + density`.
///
/// Each pair carries its total weight `w_j`, so `atoms = [(1, 1)]` is the
/// even probability measure `(δ₁ + δ₋₁)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenMeasure {
    atom0: Complex64,
    atoms: Vec<(f64, Complex64)>,
    density: Option<Density>,
}

impl EvenMeasure {
    pub fn new(atom0: Complex64, mut atoms: Vec<(f64, Complex64)>, density: Option<Density>) -> Result<Self> {
        for &(t, w) in &atoms {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Invalid(format!("atom positions must be positive (got {t})")));
            }
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::Invalid(format!("non-finite atom weight at t = {t}")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid("atom positions must be distinct".into()));
        }
        if !(atom0.re.is_finite() && atom0.im.is_finite()) {
            return Err(Error::Invalid("non-finite weight at the origin".into()));
        }
        Ok(Self { atom0, atoms, density })
    }

    /// Unit mass at the origin.
    pub fn dirac0() -> Self {
        Self {
            atom0: Complex64::new(1.0, 0.0),
            atoms: Vec::new(),
            density: None,
        }
    }

    /// `(δ_{t₀} + δ_{-t₀})/2`.
    pub fn pair(t0: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, 0.0), vec![(t0, Complex64::new(1.0, 0.0))], None)
    }

    pub fn atom0(&self) -> Complex64 {
        self.atom0
    }

    pub fn atoms(&self) -> &[(f64, Complex64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Largest `|t|` charged by the measure.
    pub fn reach(&self) -> f64 {
        let atoms = self.atoms.last().map_or(0.0, |a| a.0);
        let dens = self.density.as_ref().map_or(0.0, |d| d.grid.tmax());
        atoms.max(dens)
    }

    /// `∫ g dμ` for an even `g`.
    pub fn integrate_even(
        &self,
        params: &JacobiParams,
        g: impl Fn(f64) -> Result<Complex64> + Sync,
        quad: &QuadratureSpec,
    ) -> Result<Complex64> {
        let mut acc = self.atom0 * g(0.0)?;
        for &(t, w) in &self.atoms {
            acc += w * g(t)?;
        }
        if let Some(d) = &self.density {
            acc += density_integral(params, d, &g, quad)?;
        }
        Ok(acc)
    }

    /// `μ(ℝ)`.
    pub fn mass(&self, params: &JacobiParams, quad: &QuadratureSpec) -> Result<Complex64> {
        self.integrate_even(params, |_| Ok(Complex64::new(1.0, 0.0)), quad)
    }

    /// Parse the JSON schema `{atom0, atoms: [[t, re, im], ...], density?: {path, reference}}`;
    /// density paths are resolved against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawMeasure = serde_json::from_str(text)?;
        let atoms = raw
            .atoms
            .into_iter()
            .map(|[t, re, im]| (t, Complex64::new(re, im)))
            .collect();
        let density = match raw.density {
            Some(d) => {
                let path = if d.path.is_absolute() { d.path } else { base_dir.join(d.path) };
                Some(Density {
                    grid: GridFunction::read_csv(path)?,
                    reference: d.reference,
                })
            }
            None => None,
        };
        Self::new(raw.atom0.into(), atoms, density)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json_str(&text, base)
    }

    /// Serialize; a density grid is written to `density_path` if present.
    pub fn to_json_string(&self, density_path: Option<&Path>) -> Result<String> {
        let density = match (&self.density, density_path) {
            (Some(d), Some(p)) => {
                d.grid.write_csv(p)?;
                Some(RawDensity {
                    path: p.to_path_buf(),
                    reference: d.reference,
                })
            }
            (Some(_), None) => {
                return Err(Error::Invalid("a density needs a path to be written to".into()));
            }
            _ => None,
        };
        let raw = RawMeasure {
            atom0: Weight::Complex([self.atom0.re, self.atom0.im]),
            atoms: self.atoms.iter().map(|&(t, w)| [t, w.re, w.im]).collect(),
            density,
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }
}

fn density_integral(
    params: &JacobiParams,
    d: &Density,
    g: &(impl Fn(f64) -> Result<Complex64> + Sync),
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let failure = Failure::new();
    let integrand = |t: f64| {
        let w = match d.reference {
            DensityReference::Lebesgue => 1.0,
            DensityReference::DeltaWeighted => weight_delta(params, t),
        };
        2.0 * failure.catch(g(t)) * d.grid.eval(t) * w
    };
    let bps = panel_breaks(d.grid.tmax(), Some(d.grid.step()));
    let r = integrate_over(integrand, &bps, quad)?;
    failure.check()?;
    Ok(r.value)
}

/// Breakpoints on `[0, upper]`: geometric toward 0, then panels spanning a
/// few grid cells.
pub(crate) fn panel_breaks(upper: f64, step: Option<f64>) -> Vec<f64> {
    let head = upper.min(0.5);
    let mut pts = crate::quadrature::graded_breakpoints(head, 0.5, 24);
    let width = step.map_or(0.25, |h| (8.0 * h).max(0.05)).min(0.5);
    let mut x = head;
    while x + 1e-12 < upper {
        x = (x + width).min(upper);
        pts.push(x);
    }
    pts
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Weight {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Weight> for Complex64 {
    fn from(w: Weight) -> Self {
        match w {
            Weight::Real(x) => Complex64::new(x, 0.0),
            Weight::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    path: PathBuf,
    #[serde(default)]
    reference: DensityReference,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atom0: Weight,
    #[serde(default)]
    atoms: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<RawDensity>,
}
