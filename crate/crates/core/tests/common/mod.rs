#![allow(dead_code)]

use helicity_lab::geometry::{FieldSpec, GridSpec, VectorField3};
use helicity_lab::plugs::Plug;
use helicity_lab::surface::{Bump, BumpShape, SurfaceDomain, TemporalProfile, TimeDependentHamiltonian};

pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

pub fn abc(a: f64, b: f64, c: f64, n: usize) -> VectorField3 {
    FieldSpec::Abc { a, b, c }.materialize(grid(n)).unwrap()
}

pub fn bump(shape: BumpShape, center: [f64; 2], radius: f64, amplitude: f64, integral: f64) -> Bump {
    Bump {
        shape,
        center,
        radius,
        amplitude,
        temporal: TemporalProfile::new(integral),
    }
}

pub fn disc_hamiltonian(center: [f64; 2], patch_radius: f64, b: Bump) -> TimeDependentHamiltonian {
    TimeDependentHamiltonian::bump(SurfaceDomain::disc(center, patch_radius).unwrap(), b).unwrap()
}

/// Exact shear along x, equal to the unit suspension for y in [1.5, 4.5].
pub fn channel_spec() -> FieldSpec {
    FieldSpec::Channel {
        axis: 0,
        lo: 1.5,
        hi: 4.5,
        ramp: 1.0,
    }
}

pub fn channel(n: usize) -> VectorField3 {
    channel_spec().materialize(grid(n)).unwrap()
}

/// Smooth exponential bump plug inside the channel plateau.
pub fn reference_plug() -> Plug {
    let b = bump(BumpShape::Exponential, [3.0, 3.1], 0.8, 1.0, 1.0);
    Plug::new(0, [2.0, 5.0], disc_hamiltonian([3.0, 3.1], 1.1, b)).unwrap()
}

pub fn radial_plug(axis: usize, window: [f64; 2], center: [f64; 2], radius: f64, amplitude: f64) -> Plug {
    let b = bump(BumpShape::Exponential, center, radius, amplitude, 1.0);
    Plug::new(axis, window, disc_hamiltonian(center, radius + 0.3, b)).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
