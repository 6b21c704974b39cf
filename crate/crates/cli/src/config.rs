//! Run configuration: a TOML document (or the `inputs` echo of a JSON
//! report) describing every mathematical input of a command.

use std::path::{Path, PathBuf};

use helicity_lab::geometry::{FieldSpec, GridSpec, VectorField3};
use helicity_lab::helicity::StructureTolerance;
use helicity_lab::linking::{LinkingParams, Solenoid, MIN_CELLS_PER_RADIUS};
use helicity_lab::plugs::{Plug, SUSPENSION_TOLERANCE};
use helicity_lab::surface::{Bump, Hamiltonian, SurfaceDomain, TimeDependentHamiltonian};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plugs: Vec<PlugConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calabi: Option<HamiltonianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linking: Option<LinkingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Compactly supported Hamiltonian on a planar domain: the sum of `bumps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub domain: SurfaceDomain,
    #[serde(default)]
    pub bumps: Vec<Bump>,
    /// RK4 step of the isotopy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl HamiltonianConfig {
    pub fn build(&self) -> Result<TimeDependentHamiltonian, CliError> {
        let generator = match self.bumps.as_slice() {
            [] => Hamiltonian::Zero,
            [b] => Hamiltonian::Bump(*b),
            bs => Hamiltonian::Sum(bs.iter().copied().map(Hamiltonian::Bump).collect()),
        };
        let h = TimeDependentHamiltonian::new(self.domain, generator).map_err(CliError::from_config)?;
        match self.step {
            Some(s) => h.with_step(s).map_err(CliError::from_config),
            None => Ok(h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlugConfig {
    /// Flow direction of the box: 0, 1 or 2.
    pub axis: usize,
    /// Extent of the box along the axis.
    pub window: [f64; 2],
    pub domain: SurfaceDomain,
    #[serde(default)]
    pub bumps: Vec<Bump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl PlugConfig {
    pub fn build(&self) -> Result<Plug, CliError> {
        let h = HamiltonianConfig {
            domain: self.domain,
            bumps: self.bumps.clone(),
            step: self.step,
        }
        .build()?;
        Plug::new(self.axis, self.window, h).map_err(CliError::from_config)
    }
}

fn default_flow_step() -> f64 {
    helicity_lab::flows::DEFAULT_FLOW_STEP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    /// Flow time `T`.
    pub duration: f64,
    #[serde(default = "default_flow_step")]
    pub step: f64,
    /// Winding vector of an extra circle map whose mass flow is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winding: Option<[i64; 3]>,
}

fn default_oracle_cells() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkingConfig {
    pub solenoid: Solenoid,
    pub params: LinkingParams,
    /// Cells per minor radius of the Biot-Savart reference; 0 skips it.
    #[serde(default = "default_oracle_cells")]
    pub oracle_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCommand {
    GgVerify,
    MassflowVerify,
    LinkEstimate,
}

/// One run of `command` per entry of the relevant list: `grids` for
/// gg-verify, `durations` for massflow-verify, `pairs` for link-estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub command: SweepCommand,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grids: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub durations: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<usize>,
}

fn default_gg() -> f64 {
    1e-2
}

fn default_massflow() -> f64 {
    1e-6
}

fn default_calabi() -> f64 {
    1e-8
}

fn default_suspension() -> f64 {
    SUSPENSION_TOLERANCE
}

/// Tolerances applied by the commands; every report echoes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub structure: StructureTolerance,
    /// Suspension check inside plug boxes, relative to `max(1, max |W|)`.
    #[serde(default = "default_suspension")]
    pub suspension: f64,
    /// Largest accepted `|H(W # P) - H(W) - Cal| / |Cal|`.
    #[serde(default = "default_gg")]
    pub gg: f64,
    /// Largest accepted `|mass flow / T - flux pairing|`.
    #[serde(default = "default_massflow")]
    pub massflow: f64,
    /// Largest accepted gap between closed-form and quadrature Calabi.
    #[serde(default = "default_calabi")]
    pub calabi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structure: StructureTolerance::default(),
            suspension: default_suspension(),
            gg: default_gg(),
            massflow: default_massflow(),
            calabi: default_calabi(),
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        let s = &self.structure;
        let all = [
            ("structure.divergence", s.divergence),
            ("structure.exactness", s.exactness),
            ("structure.slice", s.slice),
            ("suspension", self.suspension),
            ("gg", self.gg),
            ("massflow", self.massflow),
            ("calabi", self.calabi),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!(
                    "tolerance {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl RunConfig {
    /// Reads a TOML config, a JSON config, or a JSON report (whose `inputs`
    /// are used).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let inputs = match value.get("inputs") {
                Some(inputs) if value.get("command").is_some() => inputs.clone(),
                _ => value,
            };
            serde_json::from_value(inputs).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let n = self.grid.ok_or_else(|| CliError::Config("missing `grid`".into()))?;
        GridSpec::new(n).map_err(CliError::from_config)
    }

    pub fn field_spec(&self) -> Result<&FieldSpec, CliError> {
        self.field
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [field] section".into()))
    }

    pub fn materialize(&self, grid: GridSpec) -> Result<VectorField3, CliError> {
        let spec = self.field_spec()?;
        spec.validate().map_err(CliError::from_config)?;
        spec.check_resolution(grid).map_err(CliError::from_config)?;
        spec.materialize(grid).map_err(CliError::from_config)
    }

    pub fn build_plugs(&self) -> Result<Vec<Plug>, CliError> {
        self.plugs.iter().map(PlugConfig::build).collect()
    }

    pub fn flow(&self) -> Result<&FlowConfig, CliError> {
        let f = self
            .flow
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [flow] section".into()))?;
        if !(f.duration.is_finite() && f.duration > 0.0) {
            return Err(CliError::Config(format!(
                "flow duration must be positive, got {}",
                f.duration
            )));
        }
        if !(f.step.is_finite() && f.step > 0.0) {
            return Err(CliError::Config(format!("flow step must be positive, got {}", f.step)));
        }
        Ok(f)
    }

    pub fn linking(&self) -> Result<&LinkingConfig, CliError> {
        let l = self
            .linking
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [linking] section".into()))?;
        l.solenoid.validate().map_err(CliError::from_config)?;
        l.params.validate().map_err(CliError::from_config)?;
        if l.oracle_cells != 0 && l.oracle_cells < MIN_CELLS_PER_RADIUS {
            return Err(CliError::Config(format!(
                "oracle_cells must be 0 or at least {MIN_CELLS_PER_RADIUS}, got {}",
                l.oracle_cells
            )));
        }
        Ok(l)
    }

    /// Structural checks for `command`, run before any computation.
    pub fn validate(&self, command: &str) -> Result<(), CliError> {
        self.tolerances.validate()?;
        match command {
            "helicity" | "flux" | "plug-insert" | "gg-verify" => {
                let grid = self.grid()?;
                self.materialize_check(grid)?;
                let plugs = self.build_plugs()?;
                if plugs.is_empty() && matches!(command, "plug-insert" | "gg-verify") {
                    return Err(CliError::Config(format!(
                        "{command} needs at least one [[plugs]] entry"
                    )));
                }
            }
            "calabi" => {
                self.calabi
                    .as_ref()
                    .ok_or_else(|| CliError::Config("missing [calabi] section".into()))?
                    .build()?;
            }
            "massflow-verify" => {
                let grid = self.grid()?;
                self.materialize_check(grid)?;
                self.flow()?;
            }
            "link-estimate" => {
                self.linking()?;
            }
            "sweep" => self.validate_sweep()?,
            other => return Err(CliError::Config(format!("unknown command {other}"))),
        }
        Ok(())
    }

    fn materialize_check(&self, grid: GridSpec) -> Result<(), CliError> {
        let spec = self.field_spec()?;
        spec.validate().map_err(CliError::from_config)?;
        spec.check_resolution(grid).map_err(CliError::from_config)
    }

    fn validate_sweep(&self) -> Result<(), CliError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
        let (used, unused): (&str, [(&str, bool); 2]) = match s.command {
            SweepCommand::GgVerify => (
                "grids",
                [("durations", s.durations.is_empty()), ("pairs", s.pairs.is_empty())],
            ),
            SweepCommand::MassflowVerify => (
                "durations",
                [("grids", s.grids.is_empty()), ("pairs", s.pairs.is_empty())],
            ),
            SweepCommand::LinkEstimate => (
                "pairs",
                [("grids", s.grids.is_empty()), ("durations", s.durations.is_empty())],
            ),
        };
        for (name, empty) in unused {
            if !empty {
                return Err(CliError::Config(format!("sweep over {used} cannot also list {name}")));
            }
        }
        match s.command {
            SweepCommand::GgVerify => {
                for &n in &s.grids {
                    let grid = GridSpec::new(n).map_err(CliError::from_config)?;
                    self.materialize_check(grid)?;
                }
                if self.build_plugs()?.is_empty() {
                    return Err(CliError::Config(
                        "gg-verify sweep needs at least one [[plugs]] entry".into(),
                    ));
                }
            }
            SweepCommand::MassflowVerify => {
                let grid = self.grid()?;
                self.materialize_check(grid)?;
                self.flow()?;
                if let Some(t) = s.durations.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
                    return Err(CliError::Config(format!("sweep durations must be positive, got {t}")));
                }
            }
            SweepCommand::LinkEstimate => {
                let l = self.linking()?;
                for &pairs in &s.pairs {
                    LinkingParams { pairs, ..l.params }
                        .validate()
                        .map_err(CliError::from_config)?;
                }
            }
        }
        Ok(())
    }
}
