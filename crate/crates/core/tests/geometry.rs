mod common;

use std::f64::consts::PI;

use common::{abc, grid, rel};
use helicity_lab::geometry::{
    self, curl, divergence, spectral, FieldSpec, FourierMode, ScalarField3, VectorField3, TORUS_VOLUME,
};
use helicity_lab::LabError;
use proptest::prelude::*;

fn max_diff(a: &VectorField3, b: &VectorField3) -> f64 {
    a.max_distance(b).unwrap()
}

fn single_mode(k: [i64; 3], component: usize, cos: f64, sin: f64) -> FieldSpec {
    FieldSpec::Fourier {
        modes: vec![FourierMode {
            wavevector: k,
            component,
            cos,
            sin,
        }],
    }
}

#[test]
fn grid_must_be_power_of_two_at_least_eight() {
    assert!(geometry::GridSpec::new(4).is_err());
    assert!(geometry::GridSpec::new(24).is_err());
    assert_eq!(grid(16).len(), 4096);
}

#[test]
fn materialize_examples() {
    let z = FieldSpec::Zero.materialize(grid(16)).unwrap();
    assert_eq!(z.max_norm(), 0.0);

    let w = abc(1.0, 1.0, 1.0, 16);
    assert_eq!(w.at(0), [1.0, 1.0, 1.0]);

    let s = single_mode([1, 0, 0], 3, 0.0, 1.0).materialize(grid(16)).unwrap();
    let g = s.grid();
    for idx in [0, 17, 300, 4000] {
        let x = g.position(idx);
        let v = s.at(idx);
        assert!(v[0] == 0.0 && v[1] == 0.0);
        assert!((v[2] - x[0].sin()).abs() < 1e-15);
    }
}

#[test]
fn unresolved_mode_names_the_wavevector() {
    let err = single_mode([0, 8, 1], 1, 1.0, 0.0).materialize(grid(16)).unwrap_err();
    match &err {
        LabError::Unresolved { wavevector, .. } => assert_eq!(*wavevector, [0, 8, 1]),
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains("[0, 8, 1]"));
}

#[test]
fn divergence_examples() {
    assert!(divergence(&abc(1.0, 1.0, 1.0, 16)).max_abs() < 1e-13);
    let w = single_mode([1, 0, 0], 1, 0.0, 1.0).materialize(grid(16)).unwrap();
    let d = divergence(&w);
    let g = w.grid();
    for (i, v) in d.values().iter().enumerate() {
        assert!((v - g.position(i)[0].cos()).abs() < 1e-13);
    }
    assert_eq!(divergence(&VectorField3::zeros(grid(8))).max_abs(), 0.0);
}

#[test]
fn curl_examples() {
    for (a, b, c) in [(1.0, 1.0, 1.0), (0.3, -1.2, 2.0)] {
        let w = abc(a, b, c, 16);
        assert!(max_diff(&curl(&w), &w) < 1e-13);
    }
    let k = FieldSpec::Constant { value: [1.0, 0.0, 0.0] }
        .materialize(grid(8))
        .unwrap();
    assert!(curl(&k).max_norm() < 1e-15);

    let w = single_mode([1, 0, 0], 3, 0.0, 1.0).materialize(grid(16)).unwrap();
    let expected = VectorField3::from_fn(w.grid(), |x| [0.0, -x[0].cos(), 0.0]);
    assert!(max_diff(&curl(&w), &expected) < 1e-13);
}

#[test]
fn integrate_scalar_examples() {
    let one = ScalarField3::from_fn(grid(16), |_| 1.0);
    assert!(rel(geometry::integrate_scalar(&one), 8.0 * PI * PI * PI) < 1e-14);
    assert!((geometry::integrate_scalar(&one) - 248.0502).abs() < 1e-4);
    let s2 = ScalarField3::from_fn(grid(16), |x| x[0].sin().powi(2));
    assert!(rel(geometry::integrate_scalar(&s2), 4.0 * PI * PI * PI) < 1e-14);
    assert_eq!(geometry::integrate_scalar(&ScalarField3::zeros(grid(8))), 0.0);
}

#[test]
fn l2_pairing_examples() {
    let w = abc(1.0, 1.0, 1.0, 16);
    let p = geometry::l2_pairing(&w, &w).unwrap();
    assert!(rel(p, 3.0 * TORUS_VOLUME) < 1e-14);
    assert!((p - 744.1506).abs() < 1e-3);

    let u = single_mode([1, 0, 0], 2, 1.0, 0.0).materialize(grid(16)).unwrap();
    let v = single_mode([0, 2, 1], 2, 0.0, 1.0).materialize(grid(16)).unwrap();
    assert!(geometry::l2_pairing(&u, &v).unwrap().abs() < 1e-12);
    assert_eq!(geometry::l2_pairing(&VectorField3::zeros(grid(16)), &w).unwrap(), 0.0);

    assert!(matches!(
        geometry::l2_pairing(&w, &abc(1.0, 1.0, 1.0, 8)),
        Err(LabError::GridMismatch { .. })
    ));
}

fn random_field(seed: u64, n: usize, kmax: i64) -> VectorField3 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let modes = (0..12)
        .map(|_| FourierMode {
            wavevector: [0, 1, 2].map(|_| rng.gen_range(-kmax..=kmax)),
            component: rng.gen_range(1..=3),
            cos: rng.gen_range(-1.0..1.0),
            sin: rng.gen_range(-1.0..1.0),
        })
        .collect();
    FieldSpec::Fourier { modes }.materialize(grid(n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_round_trip(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..grid(16).len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = ScalarField3::from_values(grid(16), values).unwrap();
        let back = spectral::inverse(f.grid(), spectral::forward(&f));
        let err = f.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * f.max_abs());
    }

    #[test]
    fn divergence_of_curl_vanishes(seed in any::<u64>()) {
        let v = random_field(seed, 16, 7);
        prop_assert!(divergence(&curl(&v)).max_abs() <= 1e-10 * v.max_norm().max(1e-300));
    }

    #[test]
    fn divergence_integrates_to_zero(seed in any::<u64>()) {
        let v = random_field(seed, 16, 7);
        prop_assert!(geometry::integrate_scalar(&divergence(&v)).abs() < 1e-12);
    }

    #[test]
    fn pairing_is_symmetric_and_bilinear(seed in any::<u64>(), s in -3.0f64..3.0) {
        let u = random_field(seed, 8, 3);
        let v = random_field(seed.wrapping_add(1), 8, 3);
        let w = random_field(seed.wrapping_add(2), 8, 3);
        let uv = geometry::l2_pairing(&u, &v).unwrap();
        let vu = geometry::l2_pairing(&v, &u).unwrap();
        let scale = 1.0 + uv.abs();
        prop_assert!((uv - vu).abs() <= 1e-12 * scale * TORUS_VOLUME);
        let lhs = geometry::l2_pairing(&u.scaled(s).add(&w).unwrap(), &v).unwrap();
        let rhs = s * uv + geometry::l2_pairing(&w, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()) * TORUS_VOLUME);
    }
}
