//! Numerical laboratory for helicity, flux, Calabi invariants, mass flow
//! and asymptotic linking of divergence-free fields.
//!
//! The ambient manifold is the flat torus T^3 = (R / 2 pi Z)^3 with its
//! Lebesgue volume form for every module except [`linking`], which works
//! with compactly supported fields in R^3.

pub mod error;
pub mod flows;
pub mod geometry;
pub mod helicity;
pub mod linking;
pub mod numeric;
pub mod plugs;
pub mod surface;

pub use error::{LabError, Result};
