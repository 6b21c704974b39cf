//! Nested quadrature for `2 int_0^1 int_Sigma H dt ^ omega`.

use rayon::prelude::*;

use super::hamiltonian::Hamiltonian;
use crate::numeric::{composite_gauss, CompensatedSum};

/// Resolution of the nested rule. Time uses composite Gauss-Legendre with
/// panel edges at multiples of `1 / time_panels` (so concatenation splits
/// land on panel edges); space uses polar coordinates around each cluster
/// of support discs, Gauss-Legendre in the radius and the periodic
/// trapezoid rule in the angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalabiQuadrature {
    pub time_panels: usize,
    pub radial_panels: usize,
    pub order: usize,
    pub angles: usize,
    pub step: f64,
}

impl Default for CalabiQuadrature {
    fn default() -> Self {
        Self {
            time_panels: 32,
            radial_panels: 8,
            order: 16,
            angles: 128,
            step: 1e-3,
        }
    }
}

/// Polar integration region `(center, radius)`.
fn regions(h: &Hamiltonian) -> Vec<([f64; 2], f64)> {
    let discs = h.supports();
    let mut unique: Vec<([f64; 2], f64)> = Vec::new();
    for d in discs {
        if !unique.contains(&d) {
            unique.push(d);
        }
    }
    // merge overlapping discs into clusters
    let mut clusters: Vec<Vec<([f64; 2], f64)>> = Vec::new();
    for d in unique {
        let touching: Vec<usize> = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.iter().any(|e| {
                    let dist = (d.0[0] - e.0[0]).hypot(d.0[1] - e.0[1]);
                    dist < d.1 + e.1
                })
            })
            .map(|(i, _)| i)
            .collect();
        let mut merged = vec![d];
        for &i in touching.iter().rev() {
            merged.extend(clusters.remove(i));
        }
        clusters.push(merged);
    }
    clusters
        .into_iter()
        .map(|c| {
            if c.len() == 1 {
                return c[0];
            }
            let k = c.len() as f64;
            let center = [
                c.iter().map(|d| d.0[0]).sum::<f64>() / k,
                c.iter().map(|d| d.0[1]).sum::<f64>() / k,
            ];
            let radius = c
                .iter()
                .map(|d| (d.0[0] - center[0]).hypot(d.0[1] - center[1]) + d.1)
                .fold(0.0, f64::max);
            (center, radius)
        })
        .collect()
}

pub fn calabi_quadrature(h: &Hamiltonian, q: &CalabiQuadrature) -> f64 {
    let times = composite_gauss(0.0, 1.0, q.time_panels, q.order);
    let regions = regions(h);
    let mut spatial: Vec<(f64, f64, f64)> = Vec::new();
    for (center, radius) in regions {
        let dtheta = 2.0 * std::f64::consts::PI / q.angles as f64;
        for (r, wr) in composite_gauss(0.0, radius, q.radial_panels, q.order) {
            for a in 0..q.angles {
                let theta = a as f64 * dtheta;
                spatial.push((
                    center[0] + r * theta.cos(),
                    center[1] + r * theta.sin(),
                    wr * r * dtheta,
                ));
            }
        }
    }
    let per_time: Vec<f64> = times
        .par_iter()
        .map(|&(t, wt)| {
            let inner: CompensatedSum = spatial
                .iter()
                .map(|&(x, y, w)| w * h.value(t, [x, y], q.step))
                .collect();
            wt * inner.value()
        })
        .collect();
    2.0 * per_time.into_iter().collect::<CompensatedSum>().value()
}
