//! Volume-preserving flows on T^3, circle-valued maps and the mass flow
//! homomorphism.
//!
//! With `mu` the Lebesgue volume and `omega = i_W mu`, the characteristic
//! field of `omega` is `W` itself, so a compatible triple is simply a
//! divergence-free field without zeros. The mass flow of the time-`T`
//! isotopy against a circle map `f` is `int lift(f o phi_T - f) dmu`, the
//! lift being tracked continuously along each trajectory; divided by `T`
//! it equals the flux paired with the class of `f`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{self, GridSpec, ScalarField3, SpectralInterpolant, VectorField3, PERIOD};
use crate::helicity::{self, FluxClass, StructureTolerance};
use crate::numeric::{deterministic_sum, rk4_step};

/// Default RK4 step for flows.
pub const DEFAULT_FLOW_STEP: f64 = 1e-2;

/// Minimum `|W|` over nodes, relative to `max |W|`, for a field to count
/// as free of fixed points.
pub const FIXED_POINT_THRESHOLD: f64 = 1e-8;

/// Divergence-free field with an off-grid evaluator and an RK4 step.
#[derive(Debug, Clone)]
pub struct VolumeFlow {
    field: VectorField3,
    interp: SpectralInterpolant,
    step: f64,
}

impl VolumeFlow {
    pub fn new(field: VectorField3, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "flow step must be positive, got {step}"
            )));
        }
        let tol = StructureTolerance::default();
        let rel = geometry::relative_divergence(&field);
        if rel > tol.divergence {
            return Err(LabError::NotDivergenceFree {
                max_div: rel * field.max_norm(),
                tolerance: tol.divergence,
            });
        }
        let interp = SpectralInterpolant::new(&field);
        Ok(Self { field, interp, step })
    }

    pub fn field(&self) -> &VectorField3 {
        &self.field
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn velocity(&self, p: [f64; 3]) -> [f64; 3] {
        self.interp.evaluate(p)
    }

    /// Equal RK4 steps of length at most `step` covering `[0, T]`.
    fn schedule(&self, duration: f64) -> (usize, f64) {
        if duration == 0.0 {
            return (0, 0.0);
        }
        let steps = (duration.abs() / self.step).ceil().max(1.0) as usize;
        (steps, duration / steps as f64)
    }

    /// Unwrapped position after time `duration` (a lift to R^3).
    pub fn flow_lifted(&self, p: [f64; 3], duration: f64) -> [f64; 3] {
        let (steps, h) = self.schedule(duration);
        let f = |_t: f64, y: [f64; 3]| self.velocity(y);
        let mut y = p;
        for s in 0..steps {
            y = rk4_step(&f, s as f64 * h, y, h);
        }
        y
    }

    /// `phi_T(p)` reduced to `[0, 2 pi)^3`.
    pub fn flow_map(&self, p: [f64; 3], duration: f64) -> [f64; 3] {
        self.flow_lifted(p, duration).map(|x| x.rem_euclid(PERIOD))
    }

    /// Determinant of the central-difference Jacobian of the lifted flow.
    pub fn jacobian_determinant(&self, p: [f64; 3], duration: f64, eps: f64) -> f64 {
        let mut j = [[0.0; 3]; 3];
        for c in 0..3 {
            let mut plus = p;
            let mut minus = p;
            plus[c] += eps;
            minus[c] -= eps;
            let (a, b) = (self.flow_lifted(plus, duration), self.flow_lifted(minus, duration));
            for r in 0..3 {
                j[r][c] = (a[r] - b[r]) / (2.0 * eps);
            }
        }
        j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
    }
}

/// Divergence-free, nowhere vanishing field: the generator of a
/// fixed-point-free volume-preserving flow with `i_W mu = omega`.
#[derive(Debug, Clone)]
pub struct CompatibleTriple {
    flow: VolumeFlow,
}

fn check_nonvanishing(w: &VectorField3) -> Result<()> {
    let grid = w.grid();
    let max = w.max_norm();
    let (idx, min) = (0..grid.len())
        .map(|i| {
            let v = w.at(i);
            (i, (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
        })
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if max == 0.0 || min <= FIXED_POINT_THRESHOLD * max {
        return Err(LabError::FixedPoint {
            min_norm: min,
            node: grid.node(idx),
        });
    }
    Ok(())
}

/// The characteristic field of `i_W mu`, which is `W`; rejects fields with
/// a (numerical) zero on the grid.
pub fn characteristic_field(w: &VectorField3) -> Result<VectorField3> {
    let tol = StructureTolerance::default();
    let rel = geometry::relative_divergence(w);
    if rel > tol.divergence {
        return Err(LabError::NotDivergenceFree {
            max_div: rel * w.max_norm(),
            tolerance: tol.divergence,
        });
    }
    check_nonvanishing(w)?;
    Ok(w.clone())
}

impl CompatibleTriple {
    pub fn new(field: VectorField3, step: f64) -> Result<Self> {
        check_nonvanishing(&field)?;
        Ok(Self {
            flow: VolumeFlow::new(field, step)?,
        })
    }

    pub fn flow(&self) -> &VolumeFlow {
        &self.flow
    }

    pub fn field(&self) -> &VectorField3 {
        self.flow.field()
    }

    pub fn flow_map(&self, p: [f64; 3], duration: f64) -> [f64; 3] {
        self.flow.flow_map(p, duration)
    }

    pub fn flux(&self) -> Result<FluxClass> {
        helicity::flux(self.field())
    }
}

/// `f(p) = (m . p) / 2 pi + g(p) mod 1`, a circle-valued map whose
/// homotopy class is the winding vector `m`.
#[derive(Debug, Clone)]
pub struct CircleMap {
    winding: [i64; 3],
    smooth: Option<SpectralInterpolant>,
}

impl CircleMap {
    pub fn linear(winding: [i64; 3]) -> Self {
        Self { winding, smooth: None }
    }

    pub fn with_smooth_part(winding: [i64; 3], g: &ScalarField3) -> Self {
        let grid = g.grid();
        let v = VectorField3::from_components([g.clone(), ScalarField3::zeros(grid), ScalarField3::zeros(grid)])
            .expect("components share a grid");
        Self {
            winding,
            smooth: Some(SpectralInterpolant::new(&v)),
        }
    }

    pub fn winding(&self) -> [i64; 3] {
        self.winding
    }

    /// A real lift `R^3 -> R` of `f`.
    pub fn lift(&self, p: [f64; 3]) -> f64 {
        let m = self.winding;
        let linear = (m[0] as f64 * p[0] + m[1] as f64 * p[1] + m[2] as f64 * p[2]) / PERIOD;
        linear + self.smooth.as_ref().map_or(0.0, |s| s.evaluate(p)[0])
    }

    /// `f(p)` in `[0, 1)`, evaluated on the reduced point.
    pub fn value(&self, p: [f64; 3]) -> f64 {
        self.lift(p.map(|x| x.rem_euclid(PERIOD))).rem_euclid(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassFlowResult {
    pub value: f64,
    pub duration: f64,
    pub winding: [i64; 3],
    pub steps: usize,
}

/// Circle-map increments must stay below a quarter turn to pin the branch.
const LIFT_BOUND: f64 = 0.25;

fn wrap_half(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r > 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// Mass flow of the time-`duration` isotopy against `f`, using grid nodes
/// as quadrature points.
pub fn mass_flow(flow: &VolumeFlow, f: &CircleMap, duration: f64) -> Result<MassFlowResult> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "duration must be finite and >= 0, got {duration}"
        )));
    }
    let grid: GridSpec = flow.field().grid();
    let (steps, h) = flow.schedule(duration);
    let rhs = |_t: f64, y: [f64; 3]| flow.velocity(y);
    let lifts: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut y = grid.position(idx);
            let mut prev = f.value(y);
            let mut lift = 0.0;
            for s in 0..steps {
                y = rk4_step(&rhs, s as f64 * h, y, h);
                let next = f.value(y);
                let inc = wrap_half(next - prev);
                if inc.abs() >= LIFT_BOUND {
                    return Err(LabError::LiftAmbiguity { increment: inc });
                }
                lift += inc;
                prev = next;
            }
            Ok(lift)
        })
        .collect();
    let lifts: Vec<f64> = lifts.into_iter().collect::<Result<_>>()?;
    let value = deterministic_sum(lifts.len(), |i| lifts[i]) * grid.cell_volume();
    Ok(MassFlowResult {
        value,
        duration,
        winding: f.winding(),
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassFlowReport {
    pub duration: f64,
    pub flux: [f64; 3],
    /// Mass flow against `e_1, e_2, e_3` divided by the duration.
    pub mass_flow_rates: [f64; 3],
    pub residuals: [f64; 3],
    pub max_residual: f64,
}

/// Compares `mass_flow(e_a) / T` with the flux period `a` for each basis
/// winding.
pub fn verify_massflow_flux(triple: &CompatibleTriple, duration: f64) -> Result<MassFlowReport> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let flux = triple.flux()?;
    let mut rates = [0.0; 3];
    let mut residuals = [0.0; 3];
    for a in 0..3 {
        let mut m = [0; 3];
        m[a] = 1;
        let mf = mass_flow(triple.flow(), &CircleMap::linear(m), duration)?;
        rates[a] = mf.value / duration;
        residuals[a] = rates[a] - flux.pair(m);
    }
    let max_residual = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(MassFlowReport {
        duration,
        flux: flux.periods,
        mass_flow_rates: rates,
        residuals,
        max_residual,
    })
}
