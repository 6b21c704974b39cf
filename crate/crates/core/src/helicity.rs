//! Flux, Coulomb-gauge vector potential and helicity of divergence-free
//! fields on T^3, plus the extended versions for surgery presentations.
//!
//! Sign convention: the orientation is `dx ^ dy ^ dz`, the primitive `A`
//! satisfies `curl A = W`, and helicity is `int A . W`. Reversing the
//! orientation flips every helicity value.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{self, spectral, GridSpec, ScalarField3, VectorField3, PERIOD};
use crate::plugs::C0Presentation;

/// Tolerances guarding the structural preconditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StructureTolerance {
    /// Allowed `max |div W| / max |W|`.
    pub divergence: f64,
    /// Allowed `|period| / ((2 pi)^2 max |W|)` before a field counts as exact.
    pub exactness: f64,
    /// Allowed disagreement between two parallel slices, relative to
    /// `(2 pi)^2 max |W|`.
    pub slice: f64,
}

impl Default for StructureTolerance {
    fn default() -> Self {
        Self {
            divergence: 1e-8,
            exactness: 1e-8,
            slice: 1e-10,
        }
    }
}

/// Periods of `omega = i_W mu` over the coordinate 2-tori `{x_a = const}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxClass {
    pub periods: [f64; 3],
}

impl FluxClass {
    /// Pairing with the class of the circle map of winding `m`.
    pub fn pair(&self, m: [i64; 3]) -> f64 {
        (0..3).map(|a| m[a] as f64 * self.periods[a]).sum()
    }

    pub fn max_abs_difference(&self, other: &FluxClass) -> f64 {
        (0..3)
            .map(|a| (self.periods[a] - other.periods[a]).abs())
            .fold(0.0, f64::max)
    }
}

/// Coulomb-gauge primitive: divergence-free with zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPotential {
    pub field: VectorField3,
}

fn check_divergence(w: &VectorField3, tol: &StructureTolerance) -> Result<()> {
    let scale = w.max_norm();
    if scale == 0.0 {
        return Ok(());
    }
    let max_div = geometry::divergence(w).max_abs();
    if max_div > tol.divergence * scale {
        return Err(LabError::NotDivergenceFree {
            max_div,
            tolerance: tol.divergence,
        });
    }
    Ok(())
}

fn slice_integral(c: &ScalarField3, axis: usize, index: usize) -> f64 {
    let grid = c.grid();
    let n = grid.n();
    let h = grid.spacing();
    let mut sum = crate::numeric::CompensatedSum::new();
    for a in 0..n {
        for b in 0..n {
            let mut node = [0; 3];
            node[axis] = index;
            node[(axis + 1) % 3] = a;
            node[(axis + 2) % 3] = b;
            sum.add(c.values()[grid.index(node[0], node[1], node[2])]);
        }
    }
    sum.value() * h * h
}

pub fn flux(w: &VectorField3) -> Result<FluxClass> {
    flux_with(w, &StructureTolerance::default())
}

/// Flux periods `(2 pi)^2 mean(W^a)`, after checking that `W` is
/// divergence-free and that two parallel slices per axis agree.
pub fn flux_with(w: &VectorField3, tol: &StructureTolerance) -> Result<FluxClass> {
    check_divergence(w, tol)?;
    let area = PERIOD * PERIOD;
    let scale = w.max_norm() * area;
    let n = w.grid().n();
    let mut periods = [0.0; 3];
    for (axis, p) in periods.iter_mut().enumerate() {
        let first = slice_integral(w.component(axis), axis, 0);
        let second = slice_integral(w.component(axis), axis, n / 2 - 1);
        if (first - second).abs() > tol.slice * scale.max(1.0) {
            return Err(LabError::FluxSliceMismatch { axis, first, second });
        }
        *p = area * w.component(axis).mean();
    }
    Ok(FluxClass { periods })
}

fn check_exact(w: &VectorField3, tol: &StructureTolerance) -> Result<FluxClass> {
    let f = flux_with(w, tol)?;
    let scale = PERIOD * PERIOD * w.max_norm();
    if f.periods.iter().any(|p| p.abs() > tol.exactness * scale) {
        return Err(LabError::NonExact { periods: f.periods });
    }
    Ok(f)
}

pub fn vector_potential(w: &VectorField3) -> Result<VectorPotential> {
    vector_potential_with(w, &StructureTolerance::default())
}

pub fn vector_potential_with(w: &VectorField3, tol: &StructureTolerance) -> Result<VectorPotential> {
    check_exact(w, tol)?;
    Ok(VectorPotential {
        field: spectral::coulomb_potential(w),
    })
}

pub fn helicity(w: &VectorField3) -> Result<f64> {
    helicity_with(w, &StructureTolerance::default())
}

pub fn helicity_with(w: &VectorField3, tol: &StructureTolerance) -> Result<f64> {
    let a = vector_potential_with(w, tol)?;
    geometry::l2_pairing(&a.field, w)
}

/// `int alpha . W` for the primitive shifted by a closed form,
/// `alpha = A + c + grad g`. Equal to the helicity for every `c` and `g`.
pub fn pairing_with_shifted_primitive(w: &VectorField3, constant: [f64; 3], gauge: &ScalarField3) -> Result<f64> {
    w.grid().ensure_same(&gauge.grid())?;
    let a = vector_potential(w)?;
    let grid: GridSpec = w.grid();
    let shift = VectorField3::from_fn(grid, |_| constant).add(&geometry::gradient(gauge))?;
    geometry::l2_pairing(&a.field.add(&shift)?, w)
}

/// Helicity of the base field plus the Calabi invariants of the plugs.
pub fn extended_helicity(p: &C0Presentation) -> Result<f64> {
    let base = helicity(p.base())?;
    let cal: f64 = p.plugs().iter().map(|plug| plug.calabi()).sum();
    Ok(base + cal)
}

/// Flux of the base field; plugs never change it.
pub fn extended_flux(p: &C0Presentation) -> Result<FluxClass> {
    flux(p.base())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FieldSpec, TORUS_VOLUME};

    #[test]
    fn translation_field_is_not_exact() {
        let grid = GridSpec::new(8).unwrap();
        let w = FieldSpec::Constant { value: [1.0, 0.0, 0.0] }
            .materialize(grid)
            .unwrap();
        let f = flux(&w).unwrap();
        assert!((f.periods[0] - PERIOD * PERIOD).abs() < 1e-12);
        match helicity(&w) {
            Err(LabError::NonExact { periods }) => assert!((periods[0] - 39.47841760435743).abs() < 1e-10),
            other => panic!("expected non-exact error, got {other:?}"),
        }
    }

    #[test]
    fn abc_is_its_own_potential() {
        let grid = GridSpec::new(16).unwrap();
        let w = FieldSpec::Abc { a: 1.0, b: 2.0, c: 0.5 }.materialize(grid).unwrap();
        let a = vector_potential(&w).unwrap();
        assert!(a.field.max_distance(&w).unwrap() < 1e-13);
        let h = helicity(&w).unwrap();
        assert!((h - TORUS_VOLUME * 5.25).abs() < 1e-12 * h);
    }

    #[test]
    fn divergent_field_is_rejected() {
        let grid = GridSpec::new(8).unwrap();
        let w = VectorField3::from_fn(grid, |p| [p[0].sin(), 0.0, 0.0]);
        assert!(matches!(flux(&w), Err(LabError::NotDivergenceFree { .. })));
    }
}
