use rustfft::num_complex::Complex64;

use super::grid::{GridSpec, VectorField3};
use super::spectral::{forward_vector, signed_index};

/// Trigonometric interpolant of a grid vector field, evaluable anywhere.
///
/// Fields with few active modes (ABC, single waves) keep a sparse list and
/// evaluate term by term. Dense spectra (plug surgeries) are evaluated by
/// contracting one axis at a time against precomputed phase tables, which
/// costs `n^3` complex multiply-adds per component and no trigonometry
/// beyond `3 n` phases. The Nyquist row is split symmetrically so the
/// interpolant is real.
#[derive(Debug, Clone)]
pub struct SpectralInterpolant {
    grid: GridSpec,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Sparse(Vec<SparseMode>),
    Dense(Box<[Vec<Complex64>; 3]>),
}

#[derive(Debug, Clone, Copy)]
struct SparseMode {
    k: [f64; 3],
    coef: [Complex64; 3],
}

/// Coefficients below this fraction of the largest one are dropped.
const COEFFICIENT_FLOOR: f64 = 1e-13;

impl SpectralInterpolant {
    pub fn new(field: &VectorField3) -> Self {
        let grid = field.grid();
        let n = grid.n();
        let scale = 1.0 / grid.len() as f64;
        let spectra = forward_vector(field);
        let max = spectra
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0_f64, |m, z| m.max(z.norm()));
        let floor = COEFFICIENT_FLOOR * max;
        let active: Vec<usize> = (0..grid.len())
            .filter(|&idx| spectra.iter().any(|s| s[idx].norm() > floor))
            .collect();
        let repr = if active.len() * 16 < grid.len() {
            let mut modes = Vec::new();
            for idx in active {
                let node = grid.node(idx);
                let coef = [0, 1, 2].map(|c| spectra[c][idx] * scale);
                // a Nyquist index contributes half at +n/2 and half at -n/2
                let choices: Vec<[f64; 3]> = expand_nyquist(node, n);
                let share = 1.0 / choices.len() as f64;
                for k in choices {
                    modes.push(SparseMode {
                        k,
                        coef: coef.map(|z| z * share),
                    });
                }
            }
            Repr::Sparse(modes)
        } else {
            let [a, b, c] = spectra;
            let scaled = |mut s: Vec<Complex64>| {
                s.iter_mut().for_each(|z| *z *= scale);
                s
            };
            Repr::Dense(Box::new([scaled(a), scaled(b), scaled(c)]))
        };
        Self { grid, repr }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn evaluate(&self, p: [f64; 3]) -> [f64; 3] {
        match &self.repr {
            Repr::Sparse(modes) => {
                let mut v = [0.0; 3];
                for m in modes {
                    let phase = m.k[0] * p[0] + m.k[1] * p[1] + m.k[2] * p[2];
                    let e = Complex64::new(phase.cos(), phase.sin());
                    for (vc, z) in v.iter_mut().zip(&m.coef) {
                        *vc += (z * e).re;
                    }
                }
                v
            }
            Repr::Dense(spectra) => self.evaluate_dense(spectra, p),
        }
    }

    fn evaluate_dense(&self, spectra: &[Vec<Complex64>; 3], p: [f64; 3]) -> [f64; 3] {
        let n = self.grid.n();
        let half = n / 2;
        // phase tables; the Nyquist entry is cos(n/2 x) so the real part of
        // the sum is the symmetric trigonometric interpolant
        let table = |x: f64| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    if i == half {
                        Complex64::new((half as f64 * x).cos(), 0.0)
                    } else {
                        let k = signed_index(i, n) as f64 * x;
                        Complex64::new(k.cos(), k.sin())
                    }
                })
                .collect()
        };
        let (ex, ey, ez) = (table(p[0]), table(p[1]), table(p[2]));
        let mut out = [0.0; 3];
        for (c, s) in spectra.iter().enumerate() {
            let mut total = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let mut plane = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let row = &s[(i * n + j) * n..(i * n + j + 1) * n];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (z, e) in row.iter().zip(&ez) {
                        acc += z * e;
                    }
                    plane += acc * ey[j];
                }
                total += plane * ex[i];
            }
            out[c] = total.re;
        }
        out
    }
}

fn expand_nyquist(node: [usize; 3], n: usize) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]];
    for (axis, &i) in node.iter().enumerate() {
        if i == n / 2 {
            let mut next = Vec::with_capacity(out.len() * 2);
            for k in &out {
                let mut plus = *k;
                let mut minus = *k;
                plus[axis] = (n / 2) as f64;
                minus[axis] = -((n / 2) as f64);
                next.push(plus);
                next.push(minus);
            }
            out = next;
        } else {
            for k in out.iter_mut() {
                k[axis] = signed_index(i, n) as f64;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_interpolant_reproduces_trigonometric_field() {
        let grid = GridSpec::new(16).unwrap();
        let f = |p: [f64; 3]| {
            [
                (p[2] - p[1]).sin(),
                (2.0 * p[0]).cos() + 0.3,
                (p[0] + p[1] + 3.0 * p[2]).sin(),
            ]
        };
        let w = VectorField3::from_fn(grid, f);
        let interp = SpectralInterpolant::new(&w);
        assert!(matches!(interp.repr, Repr::Sparse(_)));
        for p in [[0.123, 4.5, 2.2], [6.0, 0.01, 3.3]] {
            let (a, b) = (interp.evaluate(p), f(p));
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let grid = GridSpec::new(8).unwrap();
        let w = VectorField3::from_fn(grid, |p| {
            let r = ((p[0] - 3.0).powi(2) + (p[1] - 3.0).powi(2) + (p[2] - 3.0).powi(2)).sqrt();
            [(-r).exp(), r.cos(), 1.0 / (1.0 + r)]
        });
        let dense = SpectralInterpolant::new(&w);
        assert!(matches!(dense.repr, Repr::Dense(_)));
        // interpolation property at nodes
        for idx in [0usize, 77, 300, 511] {
            let v = dense.evaluate(grid.position(idx));
            let e = w.at(idx);
            for c in 0..3 {
                assert!((v[c] - e[c]).abs() < 1e-12, "{v:?} vs {e:?}");
            }
        }
        // force the sparse path on the same spectrum
        let Repr::Dense(spectra) = &dense.repr else {
            unreachable!()
        };
        let mut modes = Vec::new();
        for idx in 0..grid.len() {
            let coef = [spectra[0][idx], spectra[1][idx], spectra[2][idx]];
            let choices = expand_nyquist(grid.node(idx), 8);
            let share = 1.0 / choices.len() as f64;
            for k in choices {
                modes.push(SparseMode {
                    k,
                    coef: coef.map(|z| z * share),
                });
            }
        }
        let sparse = SpectralInterpolant {
            grid,
            repr: Repr::Sparse(modes),
        };
        let p = [1.1, 2.7, 5.3];
        let (a, b) = (dense.evaluate(p), sparse.evaluate(p));
        for c in 0..3 {
            assert!((a[c] - b[c]).abs() < 1e-12);
        }
    }
}
