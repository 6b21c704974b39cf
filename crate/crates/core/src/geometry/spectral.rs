//! Spectral transforms and differential operators on the periodic grid.
//!
//! The 3D transform applies a 1D FFT along the contiguous axis and then
//! cyclically rotates the axes, three times over. Derivatives multiply by
//! `i k` with the Nyquist wavenumber set to zero, so `div curl = 0` and
//! `curl grad = 0` hold to rounding on every grid field.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{GridSpec, ScalarField3, VectorField3};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Complex spectrum of a grid field in the same `(i, j, k)` layout.
pub type Spectrum = Vec<Complex64>;

fn transform(mut data: Vec<Complex64>, n: usize, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
    let mut scratch_len = fft.get_inplace_scratch_len();
    if scratch_len == 0 {
        scratch_len = 1;
    }
    let mut rotated = vec![Complex64::new(0.0, 0.0); data.len()];
    for _ in 0..3 {
        data.par_chunks_mut(n * n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, plane| {
                for row in plane.chunks_mut(n) {
                    fft.process_with_scratch(row, scratch);
                }
            },
        );
        // out[a][b][c] = in[b][c][a]
        rotated.par_chunks_mut(n * n).enumerate().for_each(|(a, plane)| {
            for b in 0..n {
                for c in 0..n {
                    plane[b * n + c] = data[(b * n + c) * n + a];
                }
            }
        });
        std::mem::swap(&mut data, &mut rotated);
    }
    data
}

/// Unnormalised forward transform `sum_x f(x) e^{-i k.x}`.
pub fn forward(f: &ScalarField3) -> Spectrum {
    let n = f.grid().n();
    let (fwd, _) = plans(n);
    let data = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(data, n, &fwd)
}

/// Inverse of [`forward`] (includes the `1/n^3` factor); keeps the real part.
pub fn inverse(grid: GridSpec, spectrum: Spectrum) -> ScalarField3 {
    let n = grid.n();
    let (_, inv) = plans(n);
    let scale = 1.0 / grid.len() as f64;
    let data = transform(spectrum, n, &inv);
    let values = data.into_iter().map(|c| c.re * scale).collect();
    ScalarField3::from_values(grid, values).expect("inverse transform produced non-finite samples")
}

/// Signed wavenumber of FFT index `i`, used for mode bookkeeping.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Wavenumber used by derivatives: the Nyquist index maps to zero.
#[inline]
pub fn derivative_wavenumber(i: usize, n: usize) -> f64 {
    if i < n / 2 {
        i as f64
    } else if i == n / 2 {
        0.0
    } else {
        i as f64 - n as f64
    }
}

fn wavenumbers(n: usize) -> Vec<f64> {
    (0..n).map(|i| derivative_wavenumber(i, n)).collect()
}

/// Multiply a spectrum by the symbol `s(k)` in place.
fn apply_symbol<F>(spectrum: &mut [Complex64], n: usize, symbol: F)
where
    F: Fn([f64; 3]) -> Complex64 + Sync,
{
    let k = wavenumbers(n);
    spectrum.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
        for j in 0..n {
            for l in 0..n {
                plane[j * n + l] *= symbol([k[i], k[j], k[l]]);
            }
        }
    });
}

/// Partial derivative along `axis` (0 = x, 1 = y, 2 = z).
pub fn partial(f: &ScalarField3, axis: usize) -> ScalarField3 {
    let n = f.grid().n();
    let mut s = forward(f);
    apply_symbol(&mut s, n, |k| Complex64::new(0.0, k[axis]));
    inverse(f.grid(), s)
}

pub fn gradient(f: &ScalarField3) -> VectorField3 {
    let grid = f.grid();
    let n = grid.n();
    let s = forward(f);
    let comps = [0, 1, 2].map(|axis| {
        let mut c = s.clone();
        apply_symbol(&mut c, n, |k| Complex64::new(0.0, k[axis]));
        inverse(grid, c)
    });
    VectorField3::from_components(comps).expect("components share a grid")
}

pub fn divergence(v: &VectorField3) -> ScalarField3 {
    let grid = v.grid();
    let n = grid.n();
    let mut total = vec![Complex64::new(0.0, 0.0); grid.len()];
    for axis in 0..3 {
        let mut s = forward(v.component(axis));
        apply_symbol(&mut s, n, |k| Complex64::new(0.0, k[axis]));
        total.par_iter_mut().zip(s.par_iter()).for_each(|(t, x)| *t += x);
    }
    inverse(grid, total)
}

/// Forward transforms of the three components.
pub fn forward_vector(v: &VectorField3) -> [Spectrum; 3] {
    [
        forward(v.component(0)),
        forward(v.component(1)),
        forward(v.component(2)),
    ]
}

pub fn inverse_vector(grid: GridSpec, s: [Spectrum; 3]) -> VectorField3 {
    let [a, b, c] = s;
    VectorField3::from_components([inverse(grid, a), inverse(grid, b), inverse(grid, c)])
        .expect("components share a grid")
}

/// `i k x s` mode by mode, the spectral curl.
pub fn curl_spectrum(grid: GridSpec, s: &[Spectrum; 3]) -> [Spectrum; 3] {
    let n = grid.n();
    let k = wavenumbers(n);
    let mut out = [
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
    ];
    let [o0, o1, o2] = &mut out;
    o0.par_chunks_mut(n * n)
        .zip(o1.par_chunks_mut(n * n))
        .zip(o2.par_chunks_mut(n * n))
        .enumerate()
        .for_each(|(i, ((p0, p1), p2))| {
            for j in 0..n {
                for l in 0..n {
                    let idx = (i * n + j) * n + l;
                    let local = j * n + l;
                    let kv = [k[i], k[j], k[l]];
                    let w = [s[0][idx], s[1][idx], s[2][idx]];
                    let ik = |a: usize| Complex64::new(0.0, kv[a]);
                    p0[local] = ik(1) * w[2] - ik(2) * w[1];
                    p1[local] = ik(2) * w[0] - ik(0) * w[2];
                    p2[local] = ik(0) * w[1] - ik(1) * w[0];
                }
            }
        });
    out
}

pub fn curl(v: &VectorField3) -> VectorField3 {
    let grid = v.grid();
    let s = forward_vector(v);
    inverse_vector(grid, curl_spectrum(grid, &s))
}

/// Solve `curl A = W`, `div A = 0`, `mean A = 0` mode by mode:
/// `A_k = i k x W_k / |k|^2`, zero where the derivative wavenumber vanishes.
pub fn coulomb_potential(w: &VectorField3) -> VectorField3 {
    let grid = w.grid();
    let n = grid.n();
    let k = wavenumbers(n);
    let mut s = curl_spectrum(grid, &forward_vector(w));
    for comp in s.iter_mut() {
        comp.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
            for j in 0..n {
                for l in 0..n {
                    let k2 = k[i] * k[i] + k[j] * k[j] + k[l] * k[l];
                    let c = &mut plane[j * n + l];
                    if k2 == 0.0 {
                        *c = Complex64::new(0.0, 0.0);
                    } else {
                        *c /= k2;
                    }
                }
            }
        });
    }
    inverse_vector(grid, s)
}

/// Fraction of spectral energy carried by modes with some `|k_i| >= cutoff`.
pub fn tail_energy_fraction(v: &VectorField3, cutoff: usize) -> f64 {
    let grid = v.grid();
    let n = grid.n();
    let mut total = 0.0;
    let mut tail = 0.0;
    for c in 0..3 {
        let s = forward(v.component(c));
        for (idx, z) in s.iter().enumerate() {
            let node = grid.node(idx);
            let e = z.norm_sqr();
            total += e;
            if node
                .iter()
                .any(|&i| signed_index(i, n).unsigned_abs() as usize >= cutoff)
            {
                tail += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}
