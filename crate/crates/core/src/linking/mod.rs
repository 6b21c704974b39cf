//! Compactly supported divergence-free fields in R^3, Gauss linking of
//! closed curves and the asymptotic-linking estimate of helicity.
//!
//! The estimator closes each pair of length-`T` trajectories by chords and
//! averages `lk / T^2` over independently sampled starting points; times
//! the squared support volume this converges to the helicity.

mod curves;
mod solenoid;

pub use curves::{gauss_linking, polygon_linking, segment_distance, ClosedCurve};
pub use solenoid::Solenoid;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric::{rk4_step, CompensatedSum};

/// Fewest midpoint cells across the minor radius accepted by
/// [`biot_savart_helicity`].
pub const MIN_CELLS_PER_RADIUS: usize = 8;

/// Helicity `int A . v` with `A` the Biot–Savart potential, by a midpoint
/// rule on a cylindrical grid with `cells` cells per minor radius.
///
/// Axial symmetry means only targets in the half plane `phi = 0` are
/// needed; each is weighted by its full revolution. The source cell that
/// coincides with a target is skipped, since its contribution vanishes to
/// leading order by symmetry.
pub fn biot_savart_helicity(field: &Solenoid, cells: usize) -> Result<f64> {
    field.validate()?;
    if cells < MIN_CELLS_PER_RADIUS {
        return Err(LabError::CoarseResolution(format!(
            "Biot-Savart quadrature needs at least {MIN_CELLS_PER_RADIUS} cells per minor radius, got {cells}"
        )));
    }
    let (r0, a) = (field.major_radius, field.minor_radius);
    let h = a / cells as f64;
    let section: Vec<(f64, f64)> = (0..2 * cells)
        .flat_map(|i| (0..2 * cells).map(move |j| (r0 - a + (i as f64 + 0.5) * h, -a + (j as f64 + 0.5) * h)))
        .filter(|&(r, z)| field.contains([r, 0.0, z]))
        .collect();
    let turns = ((2.0 * PI * r0 / h).ceil() as usize).max(16);
    let dphi = 2.0 * PI / turns as f64;
    let trig: Vec<(f64, f64)> = (0..turns).map(|k| (k as f64 * dphi).sin_cos()).collect();

    // sources[c * turns + k]: position and weighted field of cell c at angle k
    let sources: Vec<([f64; 3], [f64; 3])> = section
        .par_iter()
        .flat_map_iter(|&(r, z)| {
            trig.iter().map(move |&(s, c)| {
                let y = [r * c, r * s, z];
                let w = r * h * h * dphi;
                let v = field.evaluate(y);
                (y, [v[0] * w, v[1] * w, v[2] * w])
            })
        })
        .collect();

    let terms: Vec<f64> = section
        .par_iter()
        .enumerate()
        .map(|(ci, &(r, z))| {
            let x = [r, 0.0, z];
            let mut pot = [0.0; 3];
            for (si, (y, wv)) in sources.iter().enumerate() {
                if si == ci * turns {
                    continue;
                }
                let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
                let l2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                let inv = 1.0 / (l2 * l2.sqrt());
                pot[0] += (wv[1] * d[2] - wv[2] * d[1]) * inv;
                pot[1] += (wv[2] * d[0] - wv[0] * d[2]) * inv;
                pot[2] += (wv[0] * d[1] - wv[1] * d[0]) * inv;
            }
            let v = field.evaluate(x);
            let dot = pot[0] * v[0] + pot[1] * v[1] + pot[2] * v[2];
            dot / (4.0 * PI) * 2.0 * PI * r * h * h
        })
        .collect();
    Ok(terms.into_iter().collect::<CompensatedSum>().value())
}

/// Parameters of the asymptotic-linking estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkingParams {
    /// Trajectory length `T`.
    pub horizon: f64,
    pub pairs: usize,
    pub seed: u64,
    /// RK4 step along trajectories.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Closing chords passing closer than this multiple of the minor radius
    /// to the other curve trigger a resample of the pair.
    #[serde(default = "default_clearance")]
    pub clearance: f64,
}

fn default_step() -> f64 {
    0.05
}

fn default_clearance() -> f64 {
    1e-3
}

const MAX_RESAMPLES: usize = 1000;

impl LinkingParams {
    pub fn new(horizon: f64, pairs: usize, seed: u64) -> Self {
        Self {
            horizon,
            pairs,
            seed,
            step: default_step(),
            clearance: default_clearance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.pairs < 2 {
            return Err(LabError::InvalidParameter(format!(
                "need at least 2 pairs, got {}",
                self.pairs
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0 && self.step <= self.horizon / 8.0) {
            return Err(LabError::InvalidParameter(format!(
                "step must lie in (0, horizon / 8], got {}",
                self.step
            )));
        }
        if !(self.clearance.is_finite() && self.clearance >= 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "clearance must be non-negative, got {}",
                self.clearance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkingEstimate {
    /// `V^2 * mean(lk / T^2)`.
    pub estimate: f64,
    pub standard_error: f64,
    pub mean_linking_rate: f64,
    /// `V^2` with `V` the support volume.
    pub normalization: f64,
    pub horizon: f64,
    pub pairs: usize,
    pub seed: u64,
    pub step: f64,
    pub segments_per_curve: usize,
    pub resampled: usize,
    pub closed_form: f64,
    pub ratio: f64,
}

fn sample_point(field: &Solenoid, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let b = field.bounding_box();
    loop {
        let x = [0, 1, 2].map(|i| rng.gen_range(b[i][0]..b[i][1]));
        if field.contains(x) {
            return x;
        }
    }
}

/// Trajectory of `field` from `x` sampled at every RK4 step.
pub fn trajectory(field: &Solenoid, x: [f64; 3], horizon: f64, step: f64) -> Vec<[f64; 3]> {
    let steps = (horizon / step).round().max(1.0) as usize;
    let h = horizon / steps as f64;
    let f = |_t: f64, y: [f64; 3]| field.evaluate(y);
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = x;
    out.push(y);
    for s in 0..steps {
        y = rk4_step(&f, s as f64 * h, y, h);
        out.push(y);
    }
    out
}

fn closing_chord(c: &ClosedCurve) -> ([f64; 3], [f64; 3]) {
    c.segment(c.segment_count() - 1)
}

/// Linking number of one sampled pair and the number of resamples needed.
fn sample_pair(field: &Solenoid, params: &LinkingParams, pair: usize) -> Result<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(pair as u64);
    let bound = params.clearance * field.minor_radius;
    for attempt in 0..=MAX_RESAMPLES {
        let x = sample_point(field, &mut rng);
        let y = sample_point(field, &mut rng);
        let c1 = ClosedCurve::unchecked(trajectory(field, x, params.horizon, params.step))?;
        let c2 = ClosedCurve::unchecked(trajectory(field, y, params.horizon, params.step))?;
        if c2.distance_to_segment(closing_chord(&c1)) <= bound || c1.distance_to_segment(closing_chord(&c2)) <= bound {
            continue;
        }
        return Ok((polygon_linking(&c1, &c2), attempt));
    }
    Err(LabError::CurvesTooClose { distance: 0.0, bound })
}

/// Monte Carlo estimate of the helicity of `field` from asymptotic linking
/// numbers of trajectory pairs. Deterministic in `params.seed` regardless
/// of thread count.
pub fn asymptotic_linking(field: &Solenoid, params: &LinkingParams) -> Result<LinkingEstimate> {
    field.validate()?;
    params.validate()?;
    let samples: Vec<(f64, usize)> = (0..params.pairs)
        .into_par_iter()
        .map(|i| sample_pair(field, params, i))
        .collect::<Result<_>>()?;
    let t2 = params.horizon * params.horizon;
    let rates: Vec<f64> = samples.iter().map(|(lk, _)| lk / t2).collect();
    let n = rates.len() as f64;
    let mean = rates.iter().copied().collect::<CompensatedSum>().value() / n;
    let var = rates
        .iter()
        .map(|r| (r - mean) * (r - mean))
        .collect::<CompensatedSum>()
        .value()
        / (n - 1.0);
    let vol = field.support_volume();
    let normalization = vol * vol;
    let estimate = normalization * mean;
    let closed_form = field.helicity_closed_form();
    Ok(LinkingEstimate {
        estimate,
        standard_error: normalization * (var / n).sqrt(),
        mean_linking_rate: mean,
        normalization,
        horizon: params.horizon,
        pairs: params.pairs,
        seed: params.seed,
        step: params.step,
        segments_per_curve: (params.horizon / params.step).round().max(1.0) as usize + 1,
        resampled: samples.iter().map(|(_, r)| r).sum(),
        closed_form,
        ratio: estimate / closed_form,
    })
}
