//! Plugs: surgeries that replace the straight suspension flow inside an
//! embedded box by the suspension of a Hamiltonian isotopy.
//!
//! A plug lives in an axis-aligned box `[t0, t1] x patch` of T^3, where
//! the flow direction is coordinate `axis` and the patch sits in the two
//! following cyclic coordinates `(b, c)`. Inside the box the base field
//! must be the pure suspension `e_axis`. Insertion adds the exact field
//! `curl(psi e_axis)` with `psi = H(s, p) / L`, `s = (tau - t0) / L`,
//! which in box coordinates equals `(0, dH/dy, -dH/dx) / L`: the
//! characteristic through `(t0, p)` leaves the box at `(t1, phi^1(p))`.
//! The curl is spectral, so the surgery field is divergence-free and
//! keeps the flux to rounding; the price is that it agrees with the
//! analytic suspension only up to the truncated tail of the bump's
//! spectrum, which [`InsertionStats`] reports.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{self, spectral, GridSpec, ScalarField3, SpectralInterpolant, VectorField3, PERIOD};
use crate::helicity;
use crate::numeric::rk4_integrate;
use crate::surface::{self, TimeDependentHamiltonian};

#[derive(Debug, Clone, PartialEq)]
pub struct Plug {
    axis: usize,
    window: [f64; 2],
    hamiltonian: TimeDependentHamiltonian,
    /// Isotopy already present in the box. Inverse plugs are embedded
    /// through the suspension of the plug they undo, so their box carries
    /// that suspension instead of the straight flow.
    carrier: Option<TimeDependentHamiltonian>,
}

impl Plug {
    /// Plug in the box `window x patch`, where the patch is the domain of
    /// `hamiltonian`.
    pub fn new(axis: usize, window: [f64; 2], hamiltonian: TimeDependentHamiltonian) -> Result<Self> {
        let plug = Self {
            axis,
            window,
            hamiltonian,
            carrier: None,
        };
        plug.validate()?;
        Ok(plug)
    }

    fn validate(&self) -> Result<()> {
        if self.axis > 2 {
            return Err(LabError::InvalidParameter(format!(
                "plug axis must be 0, 1 or 2, got {}",
                self.axis
            )));
        }
        let [t0, t1] = self.window;
        if !(t0.is_finite() && t1.is_finite() && 0.0 < t0 && t0 < t1 && t1 < PERIOD) {
            return Err(LabError::InvalidParameter(format!(
                "plug window must satisfy 0 < t0 < t1 < 2 pi, got [{t0}, {t1}]"
            )));
        }
        let patch = self.patch();
        let c = patch.center();
        let e = patch.half_extent();
        if c.iter().any(|&x| x - e <= 0.0 || x + e >= PERIOD) {
            return Err(LabError::InvalidParameter(format!(
                "plug patch {patch:?} must lie inside the open square (0, 2 pi)^2"
            )));
        }
        Ok(())
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn window(&self) -> [f64; 2] {
        self.window
    }

    pub fn length(&self) -> f64 {
        self.window[1] - self.window[0]
    }

    pub fn patch(&self) -> &surface::SurfaceDomain {
        self.hamiltonian.domain()
    }

    pub fn hamiltonian(&self) -> &TimeDependentHamiltonian {
        &self.hamiltonian
    }

    pub fn carrier(&self) -> Option<&TimeDependentHamiltonian> {
        self.carrier.as_ref()
    }

    pub fn is_trivial(&self) -> bool {
        self.hamiltonian.is_zero()
    }

    pub fn calabi(&self) -> f64 {
        surface::calabi(&self.hamiltonian)
    }

    /// Closed box as three coordinate intervals `[lo, hi]` (x, y, z).
    pub fn bounds(&self) -> [[f64; 2]; 3] {
        let mut out = [[0.0; 2]; 3];
        out[self.axis] = self.window;
        let c = self.patch().center();
        let e = self.patch().half_extent();
        out[(self.axis + 1) % 3] = [c[0] - e, c[0] + e];
        out[(self.axis + 2) % 3] = [c[1] - e, c[1] + e];
        out
    }

    /// Box coordinates `(s, p)` of a torus point.
    pub fn local(&self, x: [f64; 3]) -> (f64, [f64; 2]) {
        let s = (x[self.axis] - self.window[0]) / self.length();
        (s, [x[(self.axis + 1) % 3], x[(self.axis + 2) % 3]])
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        self.bounds().iter().zip(x).all(|(b, v)| b[0] <= v && v <= b[1])
    }

    fn overlaps(&self, other: &Plug) -> bool {
        let (a, b) = (self.bounds(), other.bounds());
        (0..3).all(|i| a[i][0] <= b[i][1] && b[i][0] <= a[i][1])
    }

    fn box_nodes(&self, grid: GridSpec) -> Vec<usize> {
        let n = grid.n();
        let h = grid.spacing();
        let b = self.bounds();
        let range = |axis: usize| -> Vec<usize> {
            let lo = (b[axis][0] / h).ceil().max(0.0) as usize;
            let hi = ((b[axis][1] / h).floor() as usize).min(n - 1);
            (lo..=hi).collect()
        };
        let (rx, ry, rz) = (range(0), range(1), range(2));
        let mut out = Vec::with_capacity(rx.len() * ry.len() * rz.len());
        for &i in &rx {
            for &j in &ry {
                for &k in &rz {
                    out.push(grid.index(i, j, k));
                }
            }
        }
        out
    }

    /// The Hamiltonian supports and the active time window must stay at
    /// least one grid cell away from the walls of the box.
    fn check_margins(&self, grid: GridSpec) -> Result<()> {
        if self.is_trivial() && self.carrier.as_ref().is_none_or(|c| c.is_zero()) {
            return Ok(());
        }
        let h = grid.spacing();
        let mut margin = self.hamiltonian.support_margin();
        if let Some(c) = &self.carrier {
            margin = margin.min(c.support_margin());
        }
        if margin < h {
            return Err(LabError::SupportLeak(format!(
                "support stays {margin:.4} from the patch boundary, less than one grid cell ({h:.4})"
            )));
        }
        if 0.1 * self.length() < h {
            return Err(LabError::SupportLeak(format!(
                "frozen ends of the time window ({:.4}) are shorter than one grid cell ({h:.4})",
                0.1 * self.length()
            )));
        }
        Ok(())
    }

    /// Generator of the total isotopy in the box after insertion.
    pub fn effective_isotopy(&self) -> Result<TimeDependentHamiltonian> {
        match &self.carrier {
            None => Ok(self.hamiltonian.clone()),
            Some(c) => surface::compose(c, &self.hamiltonian),
        }
    }
}

/// Stream function `psi` of a plug on the grid: `H(s, p) / L` on box nodes,
/// composed with the inverse carrier flow when the box carries one.
fn stream_function(grid: GridSpec, plug: &Plug, carrier_only: bool) -> ScalarField3 {
    let nodes = plug.box_nodes(grid);
    let len = plug.length();
    let values: Vec<(usize, f64)> = nodes
        .par_iter()
        .map(|&idx| {
            let (s, p) = plug.local(grid.position(idx));
            let v = if carrier_only {
                plug.carrier.as_ref().map_or(0.0, |c| c.value(s, p))
            } else {
                match &plug.carrier {
                    None => plug.hamiltonian.value(s, p),
                    Some(c) => plug.hamiltonian.value(s, c.inverse_flow(s, p)),
                }
            };
            (idx, v / len)
        })
        .collect();
    let mut psi = ScalarField3::zeros(grid);
    let out = psi.values_mut();
    for (idx, v) in values {
        out[idx] = v;
    }
    psi
}

/// `curl(psi e_axis)`: components `(b, c)` are `(d_c psi, -d_b psi)`.
fn axial_curl(psi: &ScalarField3, axis: usize) -> VectorField3 {
    let grid = psi.grid();
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut out = VectorField3::zeros(grid);
    *out.component_mut(b) = spectral::partial(psi, c);
    let mut db = spectral::partial(psi, b);
    db.values_mut().iter_mut().for_each(|v| *v = -*v);
    *out.component_mut(c) = db;
    out
}

/// Diagnostics of a single insertion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InsertionStats {
    /// `max |delta|` over nodes outside the box divided by `max |delta|`.
    pub leakage: f64,
    /// Energy fraction of the surgery term in modes with some `|k_i| >= n/4`.
    pub tail_energy_fraction: f64,
    pub box_nodes: usize,
}

/// Surgery term `delta` with `W # P = W + delta`.
pub fn insertion_delta(grid: GridSpec, plug: &Plug) -> Result<(VectorField3, InsertionStats)> {
    plug.check_margins(grid)?;
    if plug.is_trivial() {
        return Ok((
            VectorField3::zeros(grid),
            InsertionStats {
                leakage: 0.0,
                tail_energy_fraction: 0.0,
                box_nodes: plug.box_nodes(grid).len(),
            },
        ));
    }
    let psi = stream_function(grid, plug, false);
    let delta = axial_curl(&psi, plug.axis);
    let inside = plug.box_nodes(grid);
    let mut mask = vec![false; grid.len()];
    inside.iter().for_each(|&i| mask[i] = true);
    let (mut max_in, mut max_out) = (0.0_f64, 0.0_f64);
    for (idx, &in_box) in mask.iter().enumerate() {
        let v = delta.at(idx);
        let m = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if in_box {
            max_in = max_in.max(m);
        } else {
            max_out = max_out.max(m);
        }
    }
    let total = max_in.max(max_out);
    let stats = InsertionStats {
        leakage: if total > 0.0 { max_out / total } else { 0.0 },
        tail_energy_fraction: spectral::tail_energy_fraction(&delta, grid.n() / 4),
        box_nodes: inside.len(),
    };
    Ok((delta, stats))
}

/// Tolerance for the suspension precondition of a standalone insertion,
/// relative to `max(1, max |W|)`. Neighbouring plugs leak their truncated
/// spectral tails into the box, so this is looser than rounding.
pub const SUSPENSION_TOLERANCE: f64 = 1e-6;

/// Fails unless `W` equals the expected suspension on every box node.
/// A trivial plug changes nothing, so it fits into any field.
pub fn check_suspension(w: &VectorField3, plug: &Plug, tolerance: f64) -> Result<()> {
    if plug.is_trivial() && plug.carrier.is_none() {
        return Ok(());
    }
    let grid = w.grid();
    let expected_extra = match &plug.carrier {
        Some(c) if !c.is_zero() => Some(axial_curl(&stream_function(grid, plug, true), plug.axis)),
        _ => None,
    };
    let scale = w.max_norm().max(1.0);
    let mut deviation = 0.0_f64;
    for idx in plug.box_nodes(grid) {
        let mut e = [0.0; 3];
        e[plug.axis] = 1.0;
        if let Some(x) = &expected_extra {
            let d = x.at(idx);
            for c in 0..3 {
                e[c] += d[c];
            }
        }
        let v = w.at(idx);
        for c in 0..3 {
            deviation = deviation.max((v[c] - e[c]).abs());
        }
    }
    if deviation > tolerance * scale {
        return Err(LabError::NotSuspension { deviation });
    }
    Ok(())
}

/// `W # P`.
pub fn insert_plug(w: &VectorField3, plug: &Plug) -> Result<VectorField3> {
    insert_plug_with(w, plug, SUSPENSION_TOLERANCE).map(|(v, _)| v)
}

pub fn insert_plug_with(w: &VectorField3, plug: &Plug, tolerance: f64) -> Result<(VectorField3, InsertionStats)> {
    check_suspension(w, plug, tolerance)?;
    let (delta, stats) = insertion_delta(w.grid(), plug)?;
    Ok((w.add(&delta)?, stats))
}

/// The plug undoing `plug`: it is embedded through the suspension of
/// `plug` (so its box carries that isotopy) and runs the inverse isotopy,
/// hence `W # P # inverse = W`.
pub fn inverse_plug(plug: &Plug, w: &VectorField3) -> Result<Plug> {
    check_suspension(w, plug, SUSPENSION_TOLERANCE)?;
    plug.check_margins(w.grid())?;
    if plug.is_trivial() && plug.carrier.is_none() {
        return Ok(plug.clone());
    }
    let carrier = plug.effective_isotopy()?;
    Ok(Plug {
        axis: plug.axis,
        window: plug.window,
        hamiltonian: surface::inverse_isotopy(&plug.hamiltonian),
        carrier: Some(carrier),
    })
}

pub fn calabi_of_plug(plug: &Plug) -> f64 {
    plug.calabi()
}

/// Helicity change under insertion compared with the Calabi invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GgReport {
    pub helicity_before: f64,
    pub helicity_after: f64,
    pub calabi: f64,
    /// `H(W # P) - H(W) - Cal(P)`.
    pub residual: f64,
    /// `|residual| / |Cal(P)|`, or `|residual|` for a plug with zero Calabi.
    pub relative_residual: f64,
    pub stats: InsertionStats,
}

pub fn gg_verify(w: &VectorField3, plug: &Plug) -> Result<GgReport> {
    let before = helicity::helicity(w)?;
    let (after_field, stats) = insert_plug_with(w, plug, SUSPENSION_TOLERANCE)?;
    let after = helicity::helicity(&after_field)?;
    let calabi = plug.calabi();
    let residual = after - before - calabi;
    let relative_residual = if calabi != 0.0 {
        residual.abs() / calabi.abs()
    } else {
        residual.abs()
    };
    Ok(GgReport {
        helicity_before: before,
        helicity_after: after,
        calabi,
        residual,
        relative_residual,
        stats,
    })
}

/// Follow the characteristic of `field` from `(t0, p)` through the box of
/// `plug` and return its transverse exit point at `t1`. Uses the spectral
/// interpolant of the field and fixed-step RK4 in the flow time.
pub fn trace_through_box(field: &VectorField3, plug: &Plug, p: [f64; 2], step: f64) -> [f64; 2] {
    let interp = SpectralInterpolant::new(field);
    let mut x0 = [0.0; 3];
    x0[plug.axis] = plug.window[0];
    x0[(plug.axis + 1) % 3] = p[0];
    x0[(plug.axis + 2) % 3] = p[1];
    let f = |_t: f64, x: [f64; 3]| interp.evaluate(x);
    // the axis component of the surgery field is exactly that of the base,
    // so the flow time through the box equals its length
    let x1 = rk4_integrate(&f, 0.0, plug.length(), x0, step);
    [x1[(plug.axis + 1) % 3], x1[(plug.axis + 2) % 3]]
}

/// A smooth base field together with disjoint plugs, the normal form of a
/// C^0 Hamiltonian structure.
#[derive(Debug, Clone, PartialEq)]
pub struct C0Presentation {
    base: VectorField3,
    plugs: Vec<Plug>,
}

/// Tolerance for the base field being the pure suspension in each box.
pub const BASE_SUSPENSION_TOLERANCE: f64 = 1e-12;

impl C0Presentation {
    pub fn new(base: VectorField3, plugs: Vec<Plug>) -> Result<Self> {
        let rel = geometry::relative_divergence(&base);
        let tol = helicity::StructureTolerance::default();
        if rel > tol.divergence {
            return Err(LabError::NotDivergenceFree {
                max_div: rel * base.max_norm(),
                tolerance: tol.divergence,
            });
        }
        for (i, a) in plugs.iter().enumerate() {
            for (j, b) in plugs.iter().enumerate().skip(i + 1) {
                if a.overlaps(b) {
                    return Err(LabError::BoxOverlap(format!(
                        "plug {i} box {:?} meets plug {j} box {:?}",
                        a.bounds(),
                        b.bounds()
                    )));
                }
            }
        }
        for p in &plugs {
            check_suspension(&base, p, BASE_SUSPENSION_TOLERANCE)?;
            p.check_margins(base.grid())?;
        }
        Ok(Self { base, plugs })
    }

    pub fn base(&self) -> &VectorField3 {
        &self.base
    }

    pub fn plugs(&self) -> &[Plug] {
        &self.plugs
    }

    /// The surgery field `W # P_1 # ... # P_k`. Surgery terms are computed
    /// in parallel and added in list order.
    pub fn materialize(&self) -> Result<VectorField3> {
        let grid = self.base.grid();
        let deltas: Vec<VectorField3> = self
            .plugs
            .par_iter()
            .map(|p| insertion_delta(grid, p).map(|(d, _)| d))
            .collect::<Result<_>>()?;
        let mut out = self.base.clone();
        for d in deltas {
            out = out.add(&d)?;
        }
        Ok(out)
    }
}
