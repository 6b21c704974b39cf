use std::path::Path;

use helicity_lab::flows::{mass_flow, verify_massflow_flux, CircleMap, CompatibleTriple};
use helicity_lab::geometry::{relative_divergence, GridSpec, VectorField3};
use helicity_lab::helicity::{extended_helicity, flux_with, helicity_with, FluxClass};
use helicity_lab::linking::{asymptotic_linking, biot_savart_helicity, LinkingEstimate, LinkingParams};
use helicity_lab::plugs::{insert_plug_with, C0Presentation, InsertionStats, Plug};
use helicity_lab::surface::{calabi, calabi_quadrature, CalabiQuadrature};
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, SweepCommand};
use crate::error::CliError;
use crate::report::value;

/// Scalar results and residuals of a command, plus a tolerance failure to
/// report after the results have been emitted.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub failure: Option<String>,
}

impl Outcome {
    fn result(&mut self, key: &str, v: impl serde::Serialize) {
        self.results.insert(key.into(), value(v));
    }

    fn residual(&mut self, key: &str, v: impl serde::Serialize) {
        self.residuals.insert(key.into(), value(v));
    }
}

pub fn run(command: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        "helicity" => helicity(cfg),
        "flux" => flux(cfg),
        "calabi" => calabi_cmd(cfg),
        "plug-insert" => plug_insert(cfg),
        "gg-verify" => {
            let grid = cfg.grid()?;
            gg_verify(cfg, grid)
        }
        "massflow-verify" => {
            let duration = cfg.flow()?.duration;
            massflow_verify(cfg, duration)
        }
        "link-estimate" => link_estimate(cfg, cfg.linking()?.params),
        "sweep" => sweep(cfg),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}

fn flux_value(f: &FluxClass) -> Value {
    value(f.periods)
}

fn helicity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let w = cfg.materialize(grid)?;
    let tol = cfg.tolerances.structure;
    let mut out = Outcome::default();
    out.result("flux", flux_value(&flux_with(&w, &tol)?));
    out.residual("relative_divergence", relative_divergence(&w));
    let base = helicity_with(&w, &tol)?;
    out.result("helicity", base);
    let plugs = cfg.build_plugs()?;
    if !plugs.is_empty() {
        let cal: Vec<f64> = plugs.iter().map(Plug::calabi).collect();
        let p = C0Presentation::new(w, plugs)?;
        out.result("base_helicity", base);
        out.result("plug_calabi", cal);
        out.result("helicity", extended_helicity(&p)?);
    }
    Ok(out)
}

fn flux(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let w = cfg.materialize(grid)?;
    let plugs = cfg.build_plugs()?;
    if !plugs.is_empty() {
        // validates the presentation; the flux is that of the base field
        C0Presentation::new(w.clone(), plugs)?;
    }
    let f = flux_with(&w, &cfg.tolerances.structure)?;
    let mut out = Outcome::default();
    out.result("flux", flux_value(&f));
    out.result("exact", f.periods.iter().all(|p| *p == 0.0));
    out.residual("relative_divergence", relative_divergence(&w));
    Ok(out)
}

fn calabi_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let h = cfg
        .calabi
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [calabi] section".into()))?
        .build()?;
    let q = CalabiQuadrature::default();
    let closed = calabi(&h);
    let quad = calabi_quadrature(h.generator(), &q);
    let mut out = Outcome::default();
    out.result("calabi", closed);
    out.result("calabi_quadrature", quad);
    out.result(
        "quadrature",
        json!({
            "angles": q.angles,
            "order": q.order,
            "radial_panels": q.radial_panels,
            "step": q.step,
            "time_panels": q.time_panels,
        }),
    );
    let gap = quad - closed;
    out.residual("quadrature_minus_closed_form", gap);
    if gap.abs() > cfg.tolerances.calabi {
        out.failure = Some(format!(
            "Calabi quadrature differs from the closed form by {gap:.3e} (tolerance {:.1e})",
            cfg.tolerances.calabi
        ));
    }
    Ok(out)
}

/// Inserts the plugs one after another, checking the suspension
/// precondition for each.
fn insert_all(
    w: &VectorField3,
    plugs: &[Plug],
    tolerance: f64,
) -> Result<(VectorField3, Vec<InsertionStats>), CliError> {
    let mut field = w.clone();
    let mut stats = Vec::with_capacity(plugs.len());
    for p in plugs {
        let (next, s) = insert_plug_with(&field, p, tolerance)?;
        field = next;
        stats.push(s);
    }
    Ok((field, stats))
}

fn plug_insert(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let w = cfg.materialize(grid)?;
    let plugs = cfg.build_plugs()?;
    C0Presentation::new(w.clone(), plugs.clone())?;
    let (after, stats) = insert_all(&w, &plugs, cfg.tolerances.suspension)?;
    let tol = cfg.tolerances.structure;
    let (f0, f1) = (flux_with(&w, &tol)?, flux_with(&after, &tol)?);
    let mut out = Outcome::default();
    out.result("flux_before", flux_value(&f0));
    out.result("flux_after", flux_value(&f1));
    out.result("plug_calabi", plugs.iter().map(Plug::calabi).collect::<Vec<_>>());
    out.result("insertion", stats);
    out.result("max_change", after.max_distance(&w)?);
    out.residual("flux_change", f0.max_abs_difference(&f1));
    out.residual("relative_divergence_after", relative_divergence(&after));
    Ok(out)
}

struct GgRow {
    before: f64,
    after: f64,
    calabi: f64,
    residual: f64,
    relative: f64,
    stats: Vec<InsertionStats>,
}

fn gg_row(cfg: &RunConfig, grid: GridSpec) -> Result<GgRow, CliError> {
    let w = cfg.materialize(grid)?;
    let plugs = cfg.build_plugs()?;
    C0Presentation::new(w.clone(), plugs.clone())?;
    let tol = cfg.tolerances.structure;
    let before = helicity_with(&w, &tol)?;
    let (field, stats) = insert_all(&w, &plugs, cfg.tolerances.suspension)?;
    let after = helicity_with(&field, &tol)?;
    let calabi: f64 = plugs.iter().map(Plug::calabi).sum();
    let residual = after - before - calabi;
    let relative = if calabi != 0.0 {
        residual.abs() / calabi.abs()
    } else {
        residual.abs()
    };
    Ok(GgRow {
        before,
        after,
        calabi,
        residual,
        relative,
        stats,
    })
}

fn gg_verify(cfg: &RunConfig, grid: GridSpec) -> Result<Outcome, CliError> {
    let r = gg_row(cfg, grid)?;
    let mut out = Outcome::default();
    out.result("helicity_before", r.before);
    out.result("helicity_after", r.after);
    out.result("calabi", r.calabi);
    out.result("insertion", &r.stats);
    out.residual("residual", r.residual);
    out.residual("relative_residual", r.relative);
    if r.relative > cfg.tolerances.gg {
        out.failure = Some(format!(
            "helicity change minus Calabi invariant has relative residual {:.3e} (tolerance {:.1e})",
            r.relative, cfg.tolerances.gg
        ));
    }
    Ok(out)
}

fn massflow_verify(cfg: &RunConfig, duration: f64) -> Result<Outcome, CliError> {
    let flow = cfg.flow()?;
    let w = cfg.materialize(cfg.grid()?)?;
    let triple = CompatibleTriple::new(w, flow.step)?;
    let r = verify_massflow_flux(&triple, duration)?;
    let mut out = Outcome::default();
    out.result("duration", duration);
    out.result("flux", r.flux);
    out.result("mass_flow_rates", r.mass_flow_rates);
    if let Some(m) = flow.winding {
        let mf = mass_flow(triple.flow(), &CircleMap::linear(m), duration)?;
        let pairing = triple.flux()?.pair(m);
        out.result("winding", m);
        out.result("mass_flow", mf.value);
        out.residual("winding_residual", mf.value / duration - pairing);
    }
    out.residual("residuals", r.residuals);
    out.residual("max_residual", r.max_residual);
    if r.max_residual > cfg.tolerances.massflow {
        out.failure = Some(format!(
            "mass flow per unit time differs from the flux pairing by {:.3e} (tolerance {:.1e})",
            r.max_residual, cfg.tolerances.massflow
        ));
    }
    Ok(out)
}

fn estimate(cfg: &RunConfig, params: LinkingParams) -> Result<(LinkingEstimate, Option<f64>), CliError> {
    let l = cfg.linking()?;
    let e = asymptotic_linking(&l.solenoid, &params)?;
    let oracle = match l.oracle_cells {
        0 => None,
        cells => Some(biot_savart_helicity(&l.solenoid, cells)?),
    };
    Ok((e, oracle))
}

fn link_estimate(cfg: &RunConfig, params: LinkingParams) -> Result<Outcome, CliError> {
    let (e, oracle) = estimate(cfg, params)?;
    let mut out = Outcome::default();
    out.residual("estimate_minus_closed_form", e.estimate - e.closed_form);
    if let Some(bs) = oracle {
        out.result("biot_savart", bs);
        out.residual("estimate_minus_biot_savart", e.estimate - bs);
        if e.standard_error > 0.0 {
            out.residual("standard_errors_from_biot_savart", (e.estimate - bs) / e.standard_error);
        }
    }
    out.result("estimate", e);
    Ok(out)
}

pub const GG_HEADER: [&str; 6] = [
    "grid",
    "calabi",
    "helicity_before",
    "helicity_after",
    "residual",
    "relative_residual",
];
pub const MASSFLOW_HEADER: [&str; 8] = [
    "duration",
    "flux_x",
    "flux_y",
    "flux_z",
    "rate_x",
    "rate_y",
    "rate_z",
    "max_residual",
];
pub const LINK_HEADER: [&str; 8] = [
    "pairs",
    "horizon",
    "seed",
    "estimate",
    "standard_error",
    "closed_form",
    "ratio",
    "resampled",
];

fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let path = cfg
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("sweep needs an output path (--out or `out`)".into()))?;
    let (header, rows): (&[&str], Vec<Vec<f64>>) = match s.command {
        SweepCommand::GgVerify => {
            let mut rows = Vec::new();
            for &n in &s.grids {
                let grid = GridSpec::new(n).map_err(CliError::from_config)?;
                let r = gg_row(cfg, grid)?;
                rows.push(vec![n as f64, r.calabi, r.before, r.after, r.residual, r.relative]);
            }
            (&GG_HEADER, rows)
        }
        SweepCommand::MassflowVerify => {
            let flow = cfg.flow()?;
            let w = cfg.materialize(cfg.grid()?)?;
            let triple = CompatibleTriple::new(w, flow.step)?;
            let mut rows = Vec::new();
            for &t in &s.durations {
                let r = verify_massflow_flux(&triple, t)?;
                let mut row = vec![t];
                row.extend(r.flux);
                row.extend(r.mass_flow_rates);
                row.push(r.max_residual);
                rows.push(row);
            }
            (&MASSFLOW_HEADER, rows)
        }
        SweepCommand::LinkEstimate => {
            let l = cfg.linking()?;
            let mut rows = Vec::new();
            for &pairs in &s.pairs {
                let e = asymptotic_linking(&l.solenoid, &LinkingParams { pairs, ..l.params })?;
                rows.push(vec![
                    pairs as f64,
                    e.horizon,
                    e.seed as f64,
                    e.estimate,
                    e.standard_error,
                    e.closed_form,
                    e.ratio,
                    e.resampled as f64,
                ]);
            }
            (&LINK_HEADER, rows)
        }
    };
    write_csv(path, header, &rows)?;
    let mut out = Outcome::default();
    out.result("csv", path.display().to_string());
    out.result("header", header);
    out.result("rows", &rows);
    Ok(out)
}

/// Shortest round-trip decimal, switching to exponent notation for very
/// small or large magnitudes.
fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Output {
        path: path.display().to_string(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(e.into()))?;
    w.write_record(header).map_err(|e| fail(e.into()))?;
    for row in rows {
        w.write_record(row.iter().map(|&x| format_number(x)))
            .map_err(|e| fail(e.into()))?;
    }
    w.flush().map_err(fail)
}
