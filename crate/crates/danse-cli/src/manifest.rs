//! Run manifests: a TOML-typed description of one sweep run.
//!
//! A manifest bundles the base simulation configuration, the ensemble size
//! and master seed, optional sweep axes (`W`, `g`, `gamma`, `L0`), the output
//! directory, and the data format. Every field has a default, so the minimal
//! manifest is an empty file; parsing rejects unknown keys and out-of-range
//! values with the offending key named in the message.

use std::path::{Path, PathBuf};

use danse::ensemble::{EnsembleSpec, FreezeSpec};
use danse::model::{AbsorberShape, AbsorberSpec, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// On-disk format for curve, profile, and summary data files.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Absorber block of the manifest. `enabled = false` switches boundary
/// absorption off entirely (TOML has no way to spell a missing table's
/// meaning, so the toggle is explicit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsorberSettings {
    pub enabled: bool,
    pub n_abs: usize,
    pub amplitude: f64,
    pub shape: AbsorberShape,
}

impl Default for AbsorberSettings {
    fn default() -> Self {
        let spec = AbsorberSpec::default();
        Self {
            enabled: true,
            n_abs: spec.n_abs,
            amplitude: spec.amplitude,
            shape: spec.shape,
        }
    }
}

impl AbsorberSettings {
    fn to_spec(self) -> Option<AbsorberSpec> {
        self.enabled.then_some(AbsorberSpec {
            n_abs: self.n_abs,
            amplitude: self.amplitude,
            shape: self.shape,
        })
    }
}

/// `[config]` block: base physical and numerical parameters. Sweep axes
/// override the matching field cell by cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigSection {
    pub l: usize,
    pub l0: usize,
    pub w: f64,
    pub g: f64,
    pub gamma: f64,
    pub t_max: f64,
    pub dt_max: f64,
    pub norm_drift_budget: f64,
    pub snapshot_times: Vec<f64>,
    pub absorber: AbsorberSettings,
}

impl Default for ConfigSection {
    fn default() -> Self {
        let base = SimulationConfig::default();
        Self {
            l: base.l,
            l0: base.l0,
            w: base.w,
            g: base.g,
            gamma: base.gamma,
            t_max: base.t_max,
            dt_max: base.dt_max,
            norm_drift_budget: base.norm_drift_budget,
            snapshot_times: base.snapshot_times,
            absorber: AbsorberSettings::default(),
        }
    }
}

/// `[freeze]` block mirroring the ensemble's freeze switches; parsed strictly
/// so typos in key names fail instead of being ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreezeSection {
    pub disorder: bool,
    pub phases: bool,
    pub emission: bool,
}

impl FreezeSection {
    fn to_spec(self) -> FreezeSpec {
        FreezeSpec {
            disorder: self.disorder,
            phases: self.phases,
            emission: self.emission,
        }
    }
}

/// `[sweep]` block: named value lists. Present axes must be non-empty; the
/// run covers the cartesian product, with axis order `w`, `g`, `gamma`, `l0`
/// fixing cell order and file names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l0: Option<Vec<usize>>,
}

impl SweepAxes {
    pub fn cell_count(&self) -> usize {
        let len = |n: Option<usize>| n.unwrap_or(1).max(1);
        len(self.w.as_ref().map(Vec::len))
            * len(self.g.as_ref().map(Vec::len))
            * len(self.gamma.as_ref().map(Vec::len))
            * len(self.l0.as_ref().map(Vec::len))
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_none() && self.g.is_none() && self.gamma.is_none() && self.l0.is_none()
    }

    fn validate(&self) -> Result<()> {
        fn check<T>(name: &str, axis: &Option<Vec<T>>) -> Result<()> {
            match axis {
                Some(v) if v.is_empty() => Err(CliError::Manifest(format!(
                    "sweep axis `{name}` must be a non-empty list"
                ))),
                _ => Ok(()),
            }
        }
        check("w", &self.w)?;
        check("g", &self.g)?;
        check("gamma", &self.gamma)?;
        check("l0", &self.l0)
    }
}

/// One point of the sweep grid: the base config with the swept fields
/// replaced. Swept axes are recorded even when they equal the base value so
/// file names stay unambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub w: f64,
    pub g: f64,
    pub gamma: f64,
    pub l0: usize,
    /// Which of the four fields came from sweep axes (same order as the
    /// struct fields); drives file naming.
    #[serde(skip)]
    pub swept: [bool; 4],
}

/// A fully parsed, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    /// Realizations per sweep cell.
    pub n_realizations: usize,
    /// Master seed shared by every cell; per-realization streams are derived
    /// from it. TOML integers are signed 64-bit, so seeds in files live in
    /// `[0, 2^63)`; the full `u64` range is reachable via `--seed`.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub config: ConfigSection,
    pub freeze: FreezeSection,
    pub sweep: SweepAxes,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            n_realizations: 50,
            seed: 0,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            config: ConfigSection::default(),
            freeze: FreezeSection::default(),
            sweep: SweepAxes::default(),
        }
    }
}

impl RunManifest {
    /// Expands the sweep grid in deterministic order (w, then g, then gamma,
    /// then l0, innermost last).
    pub fn cells(&self) -> Vec<Cell> {
        let ws = self.sweep.w.clone().unwrap_or_else(|| vec![self.config.w]);
        let gs = self.sweep.g.clone().unwrap_or_else(|| vec![self.config.g]);
        let gammas = self
            .sweep
            .gamma
            .clone()
            .unwrap_or_else(|| vec![self.config.gamma]);
        let l0s = self.sweep.l0.clone().unwrap_or_else(|| vec![self.config.l0]);
        let swept = [
            self.sweep.w.is_some(),
            self.sweep.g.is_some(),
            self.sweep.gamma.is_some(),
            self.sweep.l0.is_some(),
        ];
        let mut cells = Vec::with_capacity(ws.len() * gs.len() * gammas.len() * l0s.len());
        for &w in &ws {
            for &g in &gs {
                for &gamma in &gammas {
                    for &l0 in &l0s {
                        cells.push(Cell { w, g, gamma, l0, swept });
                    }
                }
            }
        }
        cells
    }

    /// The simulation configuration of one cell.
    pub fn cell_config(&self, cell: &Cell) -> SimulationConfig {
        SimulationConfig {
            l: self.config.l,
            l0: cell.l0,
            w: cell.w,
            g: cell.g,
            gamma: cell.gamma,
            t_max: self.config.t_max,
            dt_max: self.config.dt_max,
            norm_drift_budget: self.config.norm_drift_budget,
            absorber: self.config.absorber.to_spec(),
            seed: self.seed,
            snapshot_times: self.config.snapshot_times.clone(),
        }
    }

    /// The ensemble request of one cell. All cells share the master seed:
    /// realization `i` reuses the same disorder and phase draws across cells
    /// with equal `W`/`L0`, which is deliberate (common random numbers make
    /// curves within a sweep directly comparable).
    pub fn ensemble_spec(&self, cell: &Cell) -> EnsembleSpec {
        EnsembleSpec {
            n_realizations: self.n_realizations,
            master_seed: self.seed,
            config: self.cell_config(cell),
            freeze: self.freeze.to_spec(),
        }
    }

    /// Checks the manifest and every cell it expands to, so errors surface
    /// before any integration starts.
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(CliError::Manifest("n_realizations must be >= 1".into()));
        }
        self.sweep.validate()?;
        for cell in self.cells() {
            self.ensemble_spec(&cell).validate().map_err(|e| {
                CliError::Manifest(format!(
                    "invalid cell (w={}, g={}, gamma={}, l0={}): {e}",
                    cell.w, cell.g, cell.gamma, cell.l0
                ))
            })?;
        }
        Ok(())
    }

    /// Renders the manifest as TOML with every default spelled out — the echo
    /// block printed at run start and written next to the outputs.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes to TOML")
    }
}

/// Parses and validates manifest text.
pub fn parse_manifest_str(text: &str) -> Result<RunManifest> {
    let manifest: RunManifest =
        toml::from_str(text).map_err(|e| CliError::Manifest(e.to_string()))?;
    manifest.validate()?;
    Ok(manifest)
}

/// Loads a manifest file.
pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_manifest_str(&text).map_err(|e| match e {
        CliError::Manifest(msg) => CliError::Manifest(format!("{}: {msg}", path.display())),
        other => other,
    })
}
