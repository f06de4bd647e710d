//! Jacobi analysis on the hyperbolic half-line: spherical and second-kind
//! Jacobi functions, the Jacobi transform, generalized translation,
//! resolvent kernels, Tauberian diagnostics and harmonic-measure iteration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod furstenberg;
pub mod grid;
pub mod jacobi;
pub mod measure;
pub mod params;
pub mod quadrature;
pub mod resolvent;
pub mod special;
pub mod tauberian;
pub mod transform;
pub mod translation;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{EvenFunction, FnEven, FnLine, GridFunction, Interpolation, LineFunction, LineGrid};
pub use measure::{Density, DensityReference, EvenMeasure};
pub use params::{JacobiParams, SpectralPoint, StripRegion};
pub use quadrature::{QuadMethod, QuadratureSpec};
