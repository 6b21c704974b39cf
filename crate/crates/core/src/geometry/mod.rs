//! Field calculus on the flat torus T^3 = (R / 2 pi Z)^3.

mod field_spec;
mod grid;
mod interp;
pub mod spectral;

pub use field_spec::{FieldSpec, FourierMode, Unimodular};
pub use grid::{GridSpec, ScalarField3, VectorField3, PERIOD, TORUS_VOLUME};
pub use interp::SpectralInterpolant;
pub use spectral::{curl, divergence, gradient};

use crate::error::Result;
use crate::numeric::deterministic_sum;

/// Integral over T^3 with respect to Lebesgue measure: grid mean times
/// (2 pi)^3. Exact for trigonometric polynomials the grid resolves.
pub fn integrate_scalar(f: &ScalarField3) -> f64 {
    f.mean() * TORUS_VOLUME
}

/// `int_T3 u . v`, the flat-metric form of `int alpha ^ omega`.
pub fn l2_pairing(u: &VectorField3, v: &VectorField3) -> Result<f64> {
    u.grid().ensure_same(&v.grid())?;
    let len = u.grid().len();
    let [u0, u1, u2] = u.components().each_ref().map(|c| c.values());
    let [v0, v1, v2] = v.components().each_ref().map(|c| c.values());
    let sum = deterministic_sum(len, |i| u0[i] * v0[i] + u1[i] * v1[i] + u2[i] * v2[i]);
    Ok(sum / len as f64 * TORUS_VOLUME)
}

/// Largest `|div W|` relative to `max |W|` (0 for the zero field).
pub fn relative_divergence(w: &VectorField3) -> f64 {
    let scale = w.max_norm();
    if scale == 0.0 {
        return 0.0;
    }
    divergence(w).max_abs() / scale
}
