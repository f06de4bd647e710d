//! Sampled functions on `[0, T]` (even) and `[-T, T]` (general), plus the
//! traits the analytic routines accept.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Smallest admissible sample count.
pub const MIN_SAMPLES: usize = 16;

/// An even function on the real line.
pub trait EvenFunction: Sync {
    /// Value at `|t|`.
    fn eval(&self, t: f64) -> Complex64;

    /// The function vanishes for `|t| > support()`; `INFINITY` if unbounded.
    fn support(&self) -> f64 {
        f64::INFINITY
    }

    /// Sample spacing when the function is backed by a grid.
    fn spacing(&self) -> Option<f64> {
        None
    }
}

/// A (not necessarily even) function on `[-half_width, half_width]`.
pub trait LineFunction: Sync {
    fn eval_line(&self, t: f64) -> Complex64;

    fn half_width(&self) -> f64;

    fn spacing(&self) -> Option<f64> {
        None
    }
}

impl<T: EvenFunction> LineFunction for T {
    fn eval_line(&self, t: f64) -> Complex64 {
        self.eval(t.abs())
    }

    fn half_width(&self) -> f64 {
        self.support()
    }

    fn spacing(&self) -> Option<f64> {
        EvenFunction::spacing(self)
    }
}

/// Closure-backed even function.
pub struct FnEven<F> {
    f: F,
    support: f64,
}

impl<F: Fn(f64) -> Complex64 + Sync> FnEven<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            support: f64::INFINITY,
        }
    }

    /// Restrict to `[0, support]`; outside the function is zero.
    pub fn with_support(f: F, support: f64) -> Self {
        Self { f, support }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> EvenFunction for FnEven<F> {
    fn eval(&self, t: f64) -> Complex64 {
        let t = t.abs();
        if t > self.support {
            ZERO
        } else {
            (self.f)(t)
        }
    }

    fn support(&self) -> f64 {
        self.support
    }
}

/// Closure-backed function on `[-half_width, half_width]`.
pub struct FnLine<F> {
    f: F,
    half_width: f64,
}

impl<F: Fn(f64) -> Complex64 + Sync> FnLine<F> {
    pub fn new(f: F, half_width: f64) -> Self {
        Self { f, half_width }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> LineFunction for FnLine<F> {
    fn eval_line(&self, t: f64) -> Complex64 {
        (self.f)(t)
    }

    fn half_width(&self) -> f64 {
        self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

/// Left boundary condition of a cubic spline.
#[derive(Debug, Clone, Copy)]
enum LeftEnd {
    /// `f'(x₀) = 0`.
    Clamped,
    /// `f''(x₀) = 0`.
    Natural,
}

/// Second derivatives of a cubic spline on a uniform grid, natural at the
/// right end.
fn spline_moments(values: &[Complex64], h: f64, left: LeftEnd) -> Vec<Complex64> {
    let n = values.len();
    let mut m = vec![ZERO; n];
    if n < 3 {
        return m;
    }
    // Tridiagonal system for the interior (and, if clamped, the first) moments.
    let start = match left {
        LeftEnd::Clamped => 0,
        LeftEnd::Natural => 1,
    };
    let last = n - 2;
    let size = last + 1 - start;
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut lower = vec![0.0; size];
    let mut rhs = vec![ZERO; size];
    for (row, i) in (start..=last).enumerate() {
        if i == 0 {
            diag[row] = 2.0;
            upper[row] = 1.0;
            rhs[row] = (values[1] - values[0]) * (6.0 / (h * h));
        } else {
            lower[row] = 1.0;
            diag[row] = 4.0;
            upper[row] = 1.0;
            rhs[row] = (values[i + 1] - values[i] * 2.0 + values[i - 1]) * (6.0 / (h * h));
        }
    }
    // Thomas algorithm.
    for row in 1..size {
        let w = lower[row] / diag[row - 1];
        diag[row] -= w * upper[row - 1];
        let prev = rhs[row - 1];
        rhs[row] -= prev * w;
    }
    let mut sol = vec![ZERO; size];
    sol[size - 1] = rhs[size - 1] / diag[size - 1];
    for row in (0..size - 1).rev() {
        sol[row] = (rhs[row] - sol[row + 1] * upper[row]) / diag[row];
    }
    m[start..=last].copy_from_slice(&sol);
    m
}

fn spline_eval(values: &[Complex64], moments: &[Complex64], x0: f64, h: f64, x: f64) -> Complex64 {
    let n = values.len();
    let pos = ((x - x0) / h).clamp(0.0, (n - 1) as f64);
    let k = (pos.floor() as usize).min(n - 2);
    let u = pos - k as f64;
    let v = 1.0 - u;
    let h2 = h * h / 6.0;
    values[k] * v
        + values[k + 1] * u
        + (moments[k] * (v * v * v - v) + moments[k + 1] * (u * u * u - u)) * h2
}

fn linear_eval(values: &[Complex64], x0: f64, h: f64, x: f64) -> Complex64 {
    let n = values.len();
    let pos = ((x - x0) / h).clamp(0.0, (n - 1) as f64);
    let k = (pos.floor() as usize).min(n - 2);
    let u = pos - k as f64;
    values[k] * (1.0 - u) + values[k + 1] * u
}

fn check_samples(values: &[Complex64]) -> Result<()> {
    if values.len() < MIN_SAMPLES {
        return Err(Error::Invalid(format!(
            "grid needs at least {MIN_SAMPLES} samples (got {})",
            values.len()
        )));
    }
    if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Invalid(format!("non-finite sample at index {k}")));
    }
    Ok(())
}

/// An even function sampled at `t_k = k·tmax/(n-1)`, treated as zero beyond
/// `tmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    tmax: f64,
    values: Vec<Complex64>,
    interpolation: Interpolation,
    moments: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(tmax: f64, values: Vec<Complex64>, interpolation: Interpolation) -> Result<Self> {
        if !(tmax > 0.0 && tmax.is_finite()) {
            return Err(Error::Invalid(format!("tmax must be positive (got {tmax})")));
        }
        check_samples(&values)?;
        let h = tmax / (values.len() - 1) as f64;
        let moments = match interpolation {
            Interpolation::Cubic => spline_moments(&values, h, LeftEnd::Clamped),
            Interpolation::Linear => Vec::new(),
        };
        Ok(Self {
            tmax,
            values,
            interpolation,
            moments,
        })
    }

    /// Sample `f` on the uniform grid.
    pub fn from_fn(
        tmax: f64,
        n: usize,
        interpolation: Interpolation,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        Self::try_from_fn(tmax, n, interpolation, |t| Ok(f(t)))
    }

    pub fn try_from_fn(
        tmax: f64,
        n: usize,
        interpolation: Interpolation,
        f: impl Fn(f64) -> Result<Complex64>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid("grid needs at least two samples".into()));
        }
        let h = tmax / (n - 1) as f64;
        let values = (0..n).map(|k| f(k as f64 * h)).collect::<Result<Vec<_>>>()?;
        Self::new(tmax, values, interpolation)
    }

    /// Parallel variant of [`GridFunction::try_from_fn`].
    pub fn par_try_from_fn(
        tmax: f64,
        n: usize,
        interpolation: Interpolation,
        f: impl Fn(f64) -> Result<Complex64> + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        if n < 2 {
            return Err(Error::Invalid("grid needs at least two samples".into()));
        }
        let h = tmax / (n - 1) as f64;
        let values = (0..n)
            .into_par_iter()
            .map(|k| f(k as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tmax, values, interpolation)
    }

    pub fn tmax(&self) -> f64 {
        self.tmax
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.tmax / (self.values.len() - 1) as f64
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Sample abscissae.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.values.len()).map(move |k| k as f64 * h)
    }

    /// `(t_k, f(t_k))` pairs.
    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.nodes().zip(self.values.iter().copied())
    }

    /// Apply `g` to every sample, keeping the grid.
    pub fn map(&self, g: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        let values = self.samples().map(|(t, v)| g(t, v)).collect();
        Self::new(self.tmax, values, self.interpolation)
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if other.values.len() != self.values.len() || other.tmax != self.tmax {
            return Err(Error::Invalid("grids differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Self::new(self.tmax, values, self.interpolation)
    }

    /// Largest `|f(t_k)|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    /// Parse `t,re,im` rows; `t` must start at 0 and be uniformly spaced.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            re: f64,
            im: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "re", "im"] {
            return Err(Error::Invalid(format!(
                "grid CSV header must be t,re,im (got {})",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = rdr
            .deserialize::<Row>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if rows.len() < MIN_SAMPLES {
            return Err(Error::Invalid(format!(
                "grid needs at least {MIN_SAMPLES} rows (got {})",
                rows.len()
            )));
        }
        if rows[0].t != 0.0 {
            return Err(Error::Invalid(format!("grid must start at t = 0 (got {})", rows[0].t)));
        }
        let tmax = rows[rows.len() - 1].t;
        let h = tmax / (rows.len() - 1) as f64;
        for (k, r) in rows.iter().enumerate() {
            let expect = k as f64 * h;
            if (r.t - expect).abs() > 1e-9 * tmax.max(1.0) {
                return Err(Error::Invalid(format!(
                    "grid spacing is not uniform at row {k} (t = {}, expected {expect})",
                    r.t
                )));
            }
        }
        let values = rows.iter().map(|r| Complex64::new(r.re, r.im)).collect();
        Self::new(tmax, values, Interpolation::Cubic)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_csv_writer(file)
    }

    pub fn to_csv_writer(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "re", "im"])?;
        for (t, v) in self.samples() {
            w.write_record(&[format!("{t:.17e}"), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl EvenFunction for GridFunction {
    fn eval(&self, t: f64) -> Complex64 {
        let t = t.abs();
        if t > self.tmax {
            return ZERO;
        }
        let h = self.step();
        match self.interpolation {
            Interpolation::Cubic => spline_eval(&self.values, &self.moments, 0.0, h, t),
            Interpolation::Linear => linear_eval(&self.values, 0.0, h, t),
        }
    }

    fn support(&self) -> f64 {
        self.tmax
    }

    fn spacing(&self) -> Option<f64> {
        Some(self.step())
    }
}

/// Samples of a general function on `[-T, T]` with natural cubic-spline
/// interpolation.
#[derive(Debug, Clone)]
pub struct LineGrid {
    half_width: f64,
    values: Vec<Complex64>,
    moments: Vec<Complex64>,
}

impl LineGrid {
    /// Sample `f` at `2n - 1` points symmetric about 0.
    pub fn try_from_fn(half_width: f64, n: usize, f: impl Fn(f64) -> Result<Complex64>) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Invalid("half width must be positive".into()));
        }
        let count = 2 * n.max(2) - 1;
        let h = 2.0 * half_width / (count - 1) as f64;
        let values = (0..count)
            .map(|k| f(-half_width + k as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        check_samples(&values)?;
        let moments = spline_moments(&values, h, LeftEnd::Natural);
        Ok(Self {
            half_width,
            values,
            moments,
        })
    }

    fn step(&self) -> f64 {
        2.0 * self.half_width / (self.values.len() - 1) as f64
    }
}

impl LineFunction for LineGrid {
    fn eval_line(&self, t: f64) -> Complex64 {
        if t.abs() > self.half_width {
            return ZERO;
        }
        spline_eval(&self.values, &self.moments, -self.half_width, self.step(), t)
    }

    fn half_width(&self) -> f64 {
        self.half_width
    }

    fn spacing(&self) -> Option<f64> {
        Some(self.step())
    }
}
