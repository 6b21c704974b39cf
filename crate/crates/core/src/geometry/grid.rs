use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Side length of the flat torus along every axis.
pub const PERIOD: f64 = 2.0 * PI;

/// Volume of the flat torus (2 pi)^3.
pub const TORUS_VOLUME: f64 = PERIOD * PERIOD * PERIOD;

/// Uniform periodic grid on T^3 = (R / 2 pi Z)^3 with `n` nodes per axis.
///
/// Node `(i, j, k)` sits at `(i h, j h, k h)` with `h = 2 pi / n` and is
/// stored at flat index `(i n + j) n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(LabError::InvalidParameter(format!(
                "grid resolution must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        PERIOD / self.n as f64
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn node(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.node(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Quadrature weight of a single node, the cell volume h^3.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h * h * h
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n {
            return Err(LabError::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

impl TryFrom<usize> for GridSpec {
    type Error = LabError;

    fn try_from(n: usize) -> Result<Self> {
        GridSpec::new(n)
    }
}

impl From<GridSpec> for usize {
    fn from(g: GridSpec) -> usize {
        g.n
    }
}

/// Real samples of a scalar function on every node of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField3 {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "non-finite sample at node {:?}",
                grid.node(bad)
            )));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f(x, y, z)` at every node.
    pub fn from_fn<F: Fn([f64; 3]) -> f64 + Sync>(grid: GridSpec, f: F) -> Self {
        use rayon::prelude::*;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.position(idx)))
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        crate::numeric::deterministic_sum(self.values.len(), |i| self.values[i]) / self.values.len() as f64
    }
}

/// A vector field on T^3 sampled on a grid, `W = (W^1, W^2, W^3)`.
///
/// The same samples stand for the 2-form `i_W mu` (with `mu` the Lebesgue
/// volume form) and, through the flat metric, for a 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    components: [ScalarField3; 3],
}

impl VectorField3 {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            components: [
                ScalarField3::zeros(grid),
                ScalarField3::zeros(grid),
                ScalarField3::zeros(grid),
            ],
        }
    }

    pub fn from_components(components: [ScalarField3; 3]) -> Result<Self> {
        let g = components[0].grid();
        components[1].grid().ensure_same(&g)?;
        components[2].grid().ensure_same(&g)?;
        Ok(Self { components })
    }

    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3] + Sync>(grid: GridSpec, f: F) -> Self {
        use rayon::prelude::*;
        let samples: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.position(idx)))
            .collect();
        let comp = |c: usize| ScalarField3 {
            grid,
            values: samples.iter().map(|s| s[c]).collect(),
        };
        Self {
            components: [comp(0), comp(1), comp(2)],
        }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.components[0].grid()
    }

    #[inline]
    pub fn component(&self, c: usize) -> &ScalarField3 {
        &self.components[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut ScalarField3 {
        &mut self.components[c]
    }

    pub fn components(&self) -> &[ScalarField3; 3] {
        &self.components
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [
            self.components[0].values[idx],
            self.components[1].values[idx],
            self.components[2].values[idx],
        ]
    }

    /// Largest pointwise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid().len())
            .map(|i| {
                let v = self.at(i);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest pointwise difference in Euclidean norm.
    pub fn max_distance(&self, other: &VectorField3) -> Result<f64> {
        self.grid().ensure_same(&other.grid())?;
        Ok((0..self.grid().len())
            .map(|i| {
                let a = self.at(i);
                let b = other.at(i);
                let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
            })
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, s: f64) -> VectorField3 {
        let mut out = self.clone();
        for c in 0..3 {
            for v in out.components[c].values.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &VectorField3) -> Result<VectorField3> {
        self.grid().ensure_same(&other.grid())?;
        let mut out = self.clone();
        for c in 0..3 {
            for (v, w) in out.components[c].values.iter_mut().zip(&other.components[c].values) {
                *v += w;
            }
        }
        Ok(out)
    }

    /// Per-component means, the constant Fourier mode.
    pub fn means(&self) -> [f64; 3] {
        [
            self.components[0].mean(),
            self.components[1].mean(),
            self.components[2].mean(),
        ]
    }
}
