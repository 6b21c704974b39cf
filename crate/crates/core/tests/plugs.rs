mod common;

use std::f64::consts::PI;

use common::{bump, channel, disc_hamiltonian, grid, radial_plug, reference_plug};
use helicity_lab::geometry::{self, FieldSpec, VectorField3};
use helicity_lab::helicity::flux;
use helicity_lab::numeric::rk4_integrate;
use helicity_lab::plugs::{
    calabi_of_plug, gg_verify, insert_plug, insert_plug_with, inverse_plug, trace_through_box, C0Presentation, Plug,
    SUSPENSION_TOLERANCE,
};
use helicity_lab::surface::{
    calabi_quadrature, BumpShape, CalabiQuadrature, Hamiltonian, SurfaceDomain, TimeDependentHamiltonian,
};
use helicity_lab::LabError;

fn translation(n: usize) -> VectorField3 {
    FieldSpec::Constant { value: [1.0, 0.0, 0.0] }
        .materialize(grid(n))
        .unwrap()
}

fn trivial_plug(axis: usize) -> Plug {
    let patch = SurfaceDomain::disc([3.0, 3.0], 1.0).unwrap();
    Plug::new(axis, [1.0, 3.0], TimeDependentHamiltonian::zero(patch).unwrap()).unwrap()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[test]
fn trivial_plug_changes_nothing() {
    let w = channel(16);
    for axis in 0..3 {
        let out = insert_plug(&w, &trivial_plug(axis)).unwrap();
        assert_eq!(out, w);
    }
    let r = gg_verify(&channel(32), &trivial_plug(0)).unwrap();
    assert!(r.residual.abs() < 1e-12);
    assert_eq!(r.calabi, 0.0);
}

/// Largest deviation of the transverse components from `X_H / L` on the
/// box nodes, relative to `max |X_H / L|`.
fn nodal_error(n: usize, plug: &Plug) -> f64 {
    let w = translation(n);
    let out = insert_plug(&w, plug).unwrap();
    let g = out.grid();
    let len = plug.length();
    let h = plug.hamiltonian();
    let (mut err, mut scale) = (0.0_f64, 0.0_f64);
    for idx in 0..g.len() {
        let x = g.position(idx);
        if !plug.contains(x) {
            continue;
        }
        let (s, p) = plug.local(x);
        let xh = h.generator().vector_field(s, p, h.step());
        let v = out.at(idx);
        assert_eq!(v[0], 1.0);
        err = err.max((v[1] - xh[0] / len).abs()).max((v[2] - xh[1] / len).abs());
        scale = scale.max(xh[0].hypot(xh[1]) / len);
    }
    err / scale
}

#[test]
fn inserted_field_matches_the_suspension_at_nodes() {
    let plug = radial_plug(0, [1.0, 5.0], [3.0, 3.0], 1.5, 1.0);
    let coarse = nodal_error(64, &plug);
    let fine = nodal_error(128, &plug);
    assert!(fine < 5e-3, "relative nodal error {fine:.3e} at 128");
    assert!(fine < coarse / 4.0, "{coarse:.3e} -> {fine:.3e}");
}

#[test]
fn suspension_characteristics_exit_at_the_time_one_map() {
    // the box-coordinate field (1, X_H / L) carries (t0, p) to (t1, phi^1 p)
    let plug = radial_plug(0, [1.0, 5.0], [3.0, 3.0], 1.5, 1.0);
    let h = plug.hamiltonian();
    let len = plug.length();
    let f = |t: f64, y: [f64; 2]| {
        let x = h.generator().vector_field(t / len, y, h.step());
        [x[0] / len, x[1] / len]
    };
    for p in [[3.4, 3.1], [2.5, 3.6], [3.0, 2.2], [4.6, 3.0]] {
        let exit = rk4_integrate(&f, 0.0, len, p, 1e-3);
        assert!(dist(exit, h.flow(1.0, p)) < 1e-6);
    }
}

#[test]
fn grid_field_characteristics_converge_to_the_time_one_map() {
    let plug = radial_plug(0, [1.0, 5.0], [3.0, 3.0], 1.5, 1.0);
    let h = plug.hamiltonian();
    let points = [[3.4, 3.1], [2.5, 3.6]];
    let errors: Vec<f64> = [32, 64]
        .iter()
        .map(|&n| {
            let out = insert_plug(&translation(n), &plug).unwrap();
            points
                .iter()
                .map(|&p| dist(trace_through_box(&out, &plug, p, 0.02), h.flow(1.0, p)))
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errors[1] < errors[0], "{errors:?}");
    assert!(errors[1] < 1e-2, "{errors:?}");
}

#[test]
fn insertion_preserves_flux_and_divergence() {
    for (w, plug) in [
        (translation(32), radial_plug(0, [1.0, 4.0], [3.0, 3.0], 1.0, 2.0)),
        (channel(32), reference_plug()),
        (
            FieldSpec::Constant { value: [0.0, 0.0, 1.0] }
                .materialize(grid(32))
                .unwrap(),
            radial_plug(2, [0.5, 3.5], [2.0, 4.0], 0.9, -1.0),
        ),
    ] {
        let out = insert_plug(&w, &plug).unwrap();
        let (before, after) = (flux(&w).unwrap(), flux(&out).unwrap());
        assert!(before.max_abs_difference(&after) < 1e-10);
        assert!(geometry::relative_divergence(&out) < 1e-10);
    }
}

#[test]
fn insertion_is_local_up_to_spectral_truncation() {
    let plug = radial_plug(0, [1.0, 5.0], [3.0, 3.0], 1.5, 1.0);
    let leak = |n: usize| {
        let w = translation(n);
        let (out, stats) = insert_plug_with(&w, &plug, SUSPENSION_TOLERANCE).unwrap();
        let g = w.grid();
        let (mut outside, mut total) = (0.0_f64, 0.0_f64);
        for idx in 0..g.len() {
            let d = [0, 1, 2].map(|c| out.at(idx)[c] - w.at(idx)[c]);
            let m = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            total = total.max(m);
            if !plug.contains(g.position(idx)) {
                outside = outside.max(m);
            }
        }
        assert!((outside / total - stats.leakage).abs() < 1e-15);
        (stats.leakage, stats.tail_energy_fraction)
    };
    let (coarse, fine) = (leak(32), leak(64));
    assert!(fine.0 < coarse.0 && fine.0 < 2e-2, "{coarse:?} -> {fine:?}");
    assert!(fine.1 < coarse.1, "{coarse:?} -> {fine:?}");
}

#[test]
fn disjoint_plugs_commute() {
    let w = translation(32);
    let p = radial_plug(0, [1.0, 3.0], [3.0, 3.0], 0.9, 1.0);
    let q = radial_plug(0, [3.5, 5.5], [2.0, 4.0], 0.8, -1.5);
    let pq = insert_plug(&insert_plug(&w, &p).unwrap(), &q).unwrap();
    let qp = insert_plug(&insert_plug(&w, &q).unwrap(), &p).unwrap();
    assert!(pq.max_distance(&qp).unwrap() <= 4.0 * f64::EPSILON * pq.max_norm());
    let presented = C0Presentation::new(w, vec![p, q]).unwrap().materialize().unwrap();
    assert!(presented.max_distance(&pq).unwrap() <= 4.0 * f64::EPSILON * pq.max_norm());
}

#[test]
fn inverse_plug_restores_the_field() {
    let w = channel(32);
    let plug = reference_plug();
    let once = insert_plug(&w, &plug).unwrap();
    let inv = inverse_plug(&plug, &w).unwrap();
    let back = insert_plug(&once, &inv).unwrap();
    assert!(back.max_distance(&w).unwrap() < 1e-6);
    assert!((inv.calabi() + plug.calabi()).abs() < 1e-12);
    let q = CalabiQuadrature {
        time_panels: 8,
        radial_panels: 2,
        order: 16,
        angles: 64,
        step: 4e-3,
    };
    assert!((calabi_quadrature(inv.hamiltonian().generator(), &q) + plug.calabi()).abs() < 1e-6);
}

#[test]
fn inverse_of_trivial_plug_is_trivial() {
    let t = trivial_plug(1);
    let inv = inverse_plug(&t, &channel(16)).unwrap();
    assert!(inv.is_trivial());
    assert_eq!(inv, t);
}

#[test]
fn inverse_reverses_the_rotation_and_double_inverse_recovers_it() {
    let w = channel(32);
    let plug = reference_plug();
    let once = insert_plug(&w, &plug).unwrap();
    let inv = inverse_plug(&plug, &w).unwrap();
    let twice = inverse_plug(&inv, &once).unwrap();
    let k = plug.hamiltonian();
    for p in [[3.2, 3.0], [2.6, 3.4], [3.5, 3.5]] {
        let image = k.flow(1.0, p);
        // the inverse plug's own generator runs the rotation backwards
        assert!(dist(inv.hamiltonian().flow(1.0, image), p) < 1e-6);
        // its box then carries nothing: carrier followed by the inverse is the identity
        assert!(dist(inv.effective_isotopy().unwrap().flow(1.0, p), p) < 1e-6);
        assert!(dist(twice.hamiltonian().flow(1.0, p), image) < 1e-6);
        assert!(dist(twice.effective_isotopy().unwrap().flow(1.0, p), image) < 1e-6);
    }
    let thrice = insert_plug(&insert_plug(&once, &inv).unwrap(), &twice).unwrap();
    assert!(thrice.max_distance(&once).unwrap() < 1e-6);
}

#[test]
fn calabi_of_plug_examples() {
    assert_eq!(calabi_of_plug(&trivial_plug(0)), 0.0);
    let b = bump(BumpShape::Polynomial, [3.0, 3.0], 0.5, 1.0, 1.0);
    let plug = Plug::new(1, [1.0, 2.0], disc_hamiltonian([3.0, 3.0], 0.8, b)).unwrap();
    assert!((calabi_of_plug(&plug) - PI * 0.25 / 2.0).abs() < 1e-14);

    // one plug whose Hamiltonian is a disjoint union of two bumps
    let b1 = bump(BumpShape::Polynomial, [2.5, 3.0], 0.4, 1.0, 1.0);
    let b2 = bump(BumpShape::Exponential, [3.6, 3.2], 0.5, -2.0, 0.5);
    let union = TimeDependentHamiltonian::new(
        SurfaceDomain::disc([3.0, 3.0], 1.5).unwrap(),
        Hamiltonian::Sum(vec![Hamiltonian::Bump(b1), Hamiltonian::Bump(b2)]),
    )
    .unwrap();
    let parts = 2.0 * (b1.spatial_integral() + 0.5 * b2.spatial_integral());
    let plug = Plug::new(0, [1.0, 3.0], union).unwrap();
    assert!((calabi_of_plug(&plug) - parts).abs() < 1e-14);
    assert!((calabi_quadrature(plug.hamiltonian().generator(), &CalabiQuadrature::default()) - parts).abs() < 1e-10);
}

#[test]
fn gg_residual_is_small_and_shrinks() {
    let w32 = channel(32);
    let w64 = channel(64);
    let plug = reference_plug();
    let r32 = gg_verify(&w32, &plug).unwrap();
    let r64 = gg_verify(&w64, &plug).unwrap();
    assert!(r64.relative_residual < 1e-2, "{r64:?}");
    assert!(r64.relative_residual < r32.relative_residual);
    assert!(r64.helicity_before.abs() < 1e-10);
    assert!((r64.calabi - plug.calabi()).abs() == 0.0);
}

#[test]
fn structural_errors() {
    let w = translation(32);
    // support reaching within a grid cell of the patch boundary
    let b = bump(BumpShape::Exponential, [3.0, 3.0], 0.95, 1.0, 1.0);
    let tight = Plug::new(0, [1.0, 4.0], disc_hamiltonian([3.0, 3.0], 1.0, b)).unwrap();
    assert!(matches!(insert_plug(&w, &tight), Err(LabError::SupportLeak(_))));

    let p = radial_plug(0, [1.0, 3.0], [3.0, 3.0], 0.9, 1.0);
    let q = radial_plug(0, [2.5, 4.5], [3.2, 3.0], 0.9, 1.0);
    assert!(matches!(
        C0Presentation::new(w.clone(), vec![p.clone(), q]),
        Err(LabError::BoxOverlap(_))
    ));

    let abc = common::abc(1.0, 1.0, 1.0, 32);
    assert!(matches!(insert_plug(&abc, &p), Err(LabError::NotSuspension { .. })));
    assert!(matches!(
        C0Presentation::new(abc, vec![p]),
        Err(LabError::NotSuspension { .. })
    ));
}
