//! Spectral toolkit for the equilateral triangle and rational twisted tori.
//!
//! Exact arithmetic lives in [`scalar`], lattice geometry in [`lattice`],
//! the triangle eigenbasis in [`triangle`] and the quadrature rules in
//! [`quadrature`].

pub mod error;
pub mod field;
pub mod lattice;
pub mod observability;
pub mod propagator;
pub mod quadrature;
pub mod reduction;
pub mod resonance;
pub mod scalar;
pub mod tiling;
pub mod triangle;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use lattice::{Frequency, FrequencyShell, Index, QuadraticForm, TorusConfig, TwistedTorus};
pub use num_complex::Complex64;
pub use scalar::{PiMonomial, SurdRational};
pub use triangle::{BoundaryCondition, TriangleField, TriangleMode};
