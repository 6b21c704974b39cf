mod common;

use std::f64::consts::PI;

use common::bump;
use helicity_lab::surface::{
    calabi, calabi_quadrature, concatenate, ham_vector_field, integrate_isotopy, inverse_isotopy,
    isotopy_jacobian_determinant, time_reversed, BumpShape, CalabiQuadrature, Hamiltonian, RigidMotion, SurfaceDomain,
    TemporalProfile, TimeDependentHamiltonian,
};
use helicity_lab::LabError;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn domain() -> SurfaceDomain {
    SurfaceDomain::disc([0.0, 0.0], 2.0).unwrap()
}

fn radial(shape: BumpShape, radius: f64, amplitude: f64, integral: f64) -> TimeDependentHamiltonian {
    TimeDependentHamiltonian::bump(domain(), bump(shape, [0.0, 0.0], radius, amplitude, integral)).unwrap()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[test]
fn vector_field_examples() {
    let zero = TimeDependentHamiltonian::zero(domain()).unwrap();
    assert_eq!(ham_vector_field(&zero, 0.5, [0.3, 0.1]).unwrap(), [0.0, 0.0]);

    for shape in [BumpShape::Polynomial, BumpShape::Exponential] {
        let b = bump(shape, [0.0, 0.0], 1.2, 0.8, 1.0);
        let h = TimeDependentHamiltonian::bump(domain(), b).unwrap();
        let t = 0.4;
        let p: [f64; 2] = [0.3, -0.5];
        let r2 = p[0] * p[0] + p[1] * p[1];
        // g(r^2) = a phi(r^2 / rho^2), differentiated by hand
        let u = r2 / 1.44;
        let dphi = match shape {
            BumpShape::Polynomial => -3.0 * (1.0 - u).powi(2),
            BumpShape::Exponential => -(1.0 - 1.0 / (1.0 - u)).exp() / (1.0 - u).powi(2),
        };
        let g1 = 0.8 * dphi / 1.44;
        let rate = TemporalProfile::new(1.0).rate(t);
        let x = ham_vector_field(&h, t, p).unwrap();
        assert!((x[0] - 2.0 * g1 * p[1] * rate).abs() < 1e-12);
        assert!((x[1] + 2.0 * g1 * p[0] * rate).abs() < 1e-12);
        assert_eq!(ham_vector_field(&h, t, [1.3, 0.0]).unwrap(), [0.0, 0.0]);
    }
    let h = radial(BumpShape::Polynomial, 1.0, 1.0, 1.0);
    assert!(matches!(
        ham_vector_field(&h, 0.5, [2.5, 0.0]),
        Err(LabError::OutsideDomain { .. })
    ));
}

#[test]
fn vector_field_follows_the_sign_convention() {
    // i_X (dx ^ dy) = dH, i.e. X = (dH/dy, -dH/dx), by finite differences
    let h = TimeDependentHamiltonian::bump(domain(), bump(BumpShape::Exponential, [0.2, -0.1], 1.1, 1.3, 1.0)).unwrap();
    let (t, p, e) = (0.55, [0.4, 0.25], 1e-6);
    let dx = (h.value(t, [p[0] + e, p[1]]) - h.value(t, [p[0] - e, p[1]])) / (2.0 * e);
    let dy = (h.value(t, [p[0], p[1] + e]) - h.value(t, [p[0], p[1] - e])) / (2.0 * e);
    let x = ham_vector_field(&h, t, p).unwrap();
    assert!((x[0] - dy).abs() < 1e-8 && (x[1] + dx).abs() < 1e-8);
}

#[test]
fn isotopy_examples() {
    let zero = TimeDependentHamiltonian::zero(domain()).unwrap();
    assert_eq!(integrate_isotopy(&zero, [0.7, -0.2], 1.0).unwrap(), [0.7, -0.2]);

    let b = bump(BumpShape::Polynomial, [0.0, 0.0], 1.2, 0.9, 0.7);
    let h = TimeDependentHamiltonian::bump(domain(), b).unwrap();
    let p = [0.5, 0.2];
    let r2: f64 = p[0] * p[0] + p[1] * p[1];
    let theta0 = p[1].atan2(p[0]);
    for t in [0.0, 0.3, 0.5, 0.8, 1.0] {
        let q = integrate_isotopy(&h, p, t).unwrap();
        let advance = -2.0 * b.radial_derivative(r2) * b.temporal.cumulative(t);
        let expected = [
            r2.sqrt() * (theta0 + advance).cos(),
            r2.sqrt() * (theta0 + advance).sin(),
        ];
        assert!(((q[0] * q[0] + q[1] * q[1]).sqrt() - r2.sqrt()).abs() < 1e-8);
        assert!(dist(q, expected) < 1e-8, "t = {t}");
    }
    assert_eq!(integrate_isotopy(&h, p, 0.0).unwrap(), p);
    assert_eq!(integrate_isotopy(&h, [1.25, 0.3], 1.0).unwrap(), [1.25, 0.3]);
}

#[test]
fn calabi_examples() {
    let zero = TimeDependentHamiltonian::zero(domain()).unwrap();
    assert_eq!(calabi(&zero), 0.0);

    let q = CalabiQuadrature::default();
    for (a, rho) in [(1.0, 0.5), (2.5, 1.3), (-0.7, 0.9)] {
        let h = radial(BumpShape::Polynomial, rho, a, 1.0);
        let closed = a * PI * rho * rho / 2.0;
        assert!((calabi(&h) - closed).abs() < 1e-14 * closed.abs().max(1.0));
        assert!((calabi_quadrature(h.generator(), &q) - closed).abs() < 1e-10);

        let half = radial(BumpShape::Polynomial, rho, a, 0.5);
        assert!((calabi(&half) - closed / 2.0).abs() < 1e-14);
        assert!((calabi_quadrature(half.generator(), &q) - closed / 2.0).abs() < 1e-10);
    }
    let e = radial(BumpShape::Exponential, 1.1, 1.4, 1.0);
    assert!((calabi(&e) - calabi_quadrature(e.generator(), &q)).abs() < 1e-10);
}

#[test]
fn concatenation_examples() {
    let h = radial(BumpShape::Exponential, 1.0, 1.5, 1.0);
    let zero = TimeDependentHamiltonian::zero(domain()).unwrap();
    let q = CalabiQuadrature::default();
    let p = [0.3, 0.4];

    let hz = concatenate(&h, &zero).unwrap();
    assert!(dist(hz.flow(1.0, p), h.flow(1.0, p)) < 1e-9);
    assert!((calabi_quadrature(hz.generator(), &q) - calabi(&h)).abs() < 1e-10);

    let hh = concatenate(&h, &h).unwrap();
    assert!((calabi_quadrature(hh.generator(), &q) - 2.0 * calabi(&h)).abs() < 1e-9);
    assert!((calabi(&hh) - 2.0 * calabi(&h)).abs() < 1e-12);

    let back = concatenate(&h, &time_reversed(&h)).unwrap();
    assert!(dist(back.flow(1.0, p), p) < 1e-9);
    assert!(calabi_quadrature(back.generator(), &q).abs() < 1e-10);
    assert!(calabi(&back).abs() < 1e-14);

    let other = TimeDependentHamiltonian::zero(SurfaceDomain::disc([0.0, 0.0], 1.5).unwrap()).unwrap();
    assert!(matches!(concatenate(&h, &other), Err(LabError::DomainMismatch(_))));
}

#[test]
fn calabi_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let q = CalabiQuadrature::default();
    for _ in 0..10 {
        let mut random = || {
            let shape = if rng.gen_bool(0.5) {
                BumpShape::Polynomial
            } else {
                BumpShape::Exponential
            };
            let center = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            let b = bump(
                shape,
                center,
                rng.gen_range(0.3..1.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.2..1.5),
            );
            TimeDependentHamiltonian::bump(domain(), b).unwrap()
        };
        let (h1, h2) = (random(), random());
        let (c1, c2) = (calabi(&h1), calabi(&h2));
        let joined = calabi_quadrature(concatenate(&h1, &h2).unwrap().generator(), &q);
        assert!(
            (joined - c1 - c2).abs() <= 1e-8 * (1.0 + c1.abs() + c2.abs()),
            "{joined} vs {c1} + {c2}"
        );
    }
}

#[test]
fn calabi_is_natural_under_rigid_motions() {
    let q = CalabiQuadrature::default();
    let h = TimeDependentHamiltonian::bump(domain(), bump(BumpShape::Polynomial, [0.2, -0.3], 0.8, 1.7, 1.0)).unwrap();
    for motion in [
        RigidMotion {
            angle: 0.0,
            shift: [3.0, -1.0],
        },
        RigidMotion {
            angle: 1.1,
            shift: [0.0, 0.0],
        },
        RigidMotion {
            angle: -2.4,
            shift: [5.0, 4.5],
        },
    ] {
        let moved = h.moved(motion, motion.map_domain(h.domain())).unwrap();
        assert!((calabi_quadrature(moved.generator(), &q) - calabi(&h)).abs() < 1e-10);
        assert!((calabi(&moved) - calabi(&h)).abs() < 1e-14);
        let p = [0.1, 0.2];
        let direct = motion.apply(h.flow(1.0, p));
        assert!(dist(moved.flow(1.0, motion.apply(p)), direct) < 1e-10);
    }
}

#[test]
fn inverse_isotopy_undoes_the_flow() {
    let h = TimeDependentHamiltonian::bump(domain(), bump(BumpShape::Exponential, [0.1, 0.1], 1.2, 2.0, 1.0)).unwrap();
    let inv = inverse_isotopy(&h);
    for p in [[0.3, 0.2], [-0.5, 0.6], [0.0, -0.9]] {
        assert!(dist(inv.flow(1.0, h.flow(1.0, p)), p) < 1e-9);
        assert!(dist(inv.flow(0.6, h.flow(0.6, p)), p) < 1e-9);
    }
    // each quadrature node of the inverse generator needs a flow evaluation,
    // so a coarse rule is used here
    let coarse = CalabiQuadrature {
        time_panels: 8,
        radial_panels: 2,
        order: 16,
        angles: 64,
        step: 4e-3,
    };
    assert!((calabi(&inv) + calabi(&h)).abs() < 1e-14);
    assert!((calabi_quadrature(inv.generator(), &coarse) + calabi(&h)).abs() < 1e-7);
}

#[test]
fn square_patches_work_like_discs() {
    let sq = SurfaceDomain::square([1.0, 1.0], 1.0).unwrap();
    let h = TimeDependentHamiltonian::bump(sq, bump(BumpShape::Polynomial, [1.0, 1.0], 0.9, 1.0, 1.0)).unwrap();
    assert!((calabi(&h) - PI * 0.81 / 2.0).abs() < 1e-14);
    assert!(TimeDependentHamiltonian::bump(sq, bump(BumpShape::Polynomial, [1.0, 1.0], 1.0, 1.0, 1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn isotopy_preserves_area(
        x in -1.2f64..1.2, y in -1.2f64..1.2, t in 0.0f64..=1.0,
        a in -2.0f64..2.0, rho in 0.4f64..1.5, poly in any::<bool>(),
    ) {
        let shape = if poly { BumpShape::Polynomial } else { BumpShape::Exponential };
        let h = radial(shape, rho, a, 1.0);
        let det = isotopy_jacobian_determinant(&h, [x, y], t, 1e-6);
        prop_assert!((det - 1.0).abs() < 1e-6, "det = {}", det);
    }

    #[test]
    fn points_outside_the_support_never_move(r in 1.0f64..1.9, angle in 0.0f64..6.3, t in 0.0f64..=1.0) {
        let h = TimeDependentHamiltonian::bump(domain(), bump(BumpShape::Exponential, [0.1, 0.0], 0.85, 3.0, 1.0)).unwrap();
        let p = [r * angle.cos(), r * angle.sin()];
        if dist(p, [0.1, 0.0]) >= 0.85 {
            prop_assert_eq!(integrate_isotopy(&h, p, t).unwrap(), p);
        }
    }

    #[test]
    fn flow_starts_at_identity(x in -1.9f64..1.9, y in -1.9f64..1.9) {
        let h = radial(BumpShape::Polynomial, 1.2, 1.0, 1.0);
        prop_assert_eq!(integrate_isotopy(&h, [x, y], 0.0).unwrap(), [x, y]);
    }

    #[test]
    fn composite_isotopies_preserve_area(x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let h = TimeDependentHamiltonian::bump(domain(), bump(BumpShape::Exponential, [0.2, 0.0], 1.0, 0.5, 1.0)).unwrap();
        let g = TimeDependentHamiltonian::bump(domain(), bump(BumpShape::Polynomial, [-0.2, 0.1], 0.9, -0.4, 1.0)).unwrap();
        let c = concatenate(&h, &g).unwrap();
        let det = isotopy_jacobian_determinant(&c, [x, y], 1.0, 1e-6);
        prop_assert!((det - 1.0).abs() < 1e-6);
    }
}

#[test]
fn generator_values_are_consistent() {
    // the concatenation runs the first isotopy at double speed
    let h = radial(BumpShape::Polynomial, 1.0, 1.0, 1.0);
    let zero = TimeDependentHamiltonian::zero(domain()).unwrap();
    let c = concatenate(&h, &zero).unwrap();
    assert!((c.value(0.25, [0.1, 0.2]) - 2.0 * h.value(0.5, [0.1, 0.2])).abs() < 1e-15);
    assert!(matches!(c.generator(), Hamiltonian::Concat(..)));
}
