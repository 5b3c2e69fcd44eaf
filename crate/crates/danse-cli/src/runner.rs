//! Sweep orchestration: expands a manifest into cells, runs one ensemble per
//! cell, and writes curve/profile/summary files plus a metadata sidecar.
//!
//! The orchestrator itself is sequential; all parallelism lives inside the
//! ensemble layer. Data files (curves, profiles, summary, resolved manifest)
//! are deterministic functions of the manifest, independent of thread count.
//! The sidecar additionally records wall time, so reruns differ only there.

use std::path::{Path, PathBuf};
use std::time::Instant;

use danse::ensemble::{self, EnsembleResult};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::manifest::{Cell, OutputFormat, RunManifest};
use crate::output::{atomic_write, value_token, Table};

/// Per-cell report embedded in the sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub w: f64,
    pub g: f64,
    pub gamma: f64,
    pub l0: usize,
    pub files: Vec<String>,
    pub n_succeeded: usize,
    pub mean_se_events: f64,
    pub p_final_mean: f64,
    pub p_final_sem: f64,
}

/// Metadata sidecar (`run.json`). Together with the code version it pins
/// everything needed to reproduce the data files bit for bit; `wall_time_s`
/// is the only field that varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub code_version: String,
    pub manifest: RunManifest,
    pub total_cells: usize,
    pub wall_time_s: f64,
    pub cells: Vec<CellReport>,
}

/// Everything `run` produced, for callers that post-process.
pub struct RunReport {
    pub out_dir: PathBuf,
    pub summary_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub cells: Vec<CellReport>,
}

/// File stem for one cell: swept axes only, in fixed axis order, e.g.
/// `w4_gamma0p001`. Single-cell runs get an empty stem.
fn cell_stem(cell: &Cell) -> String {
    let mut parts = Vec::new();
    if cell.swept[0] {
        parts.push(format!("w{}", value_token(cell.w)));
    }
    if cell.swept[1] {
        parts.push(format!("g{}", value_token(cell.g)));
    }
    if cell.swept[2] {
        parts.push(format!("gamma{}", value_token(cell.gamma)));
    }
    if cell.swept[3] {
        parts.push(format!("l0{}", value_token(cell.l0 as f64)));
    }
    parts.join("_")
}

fn file_name(kind: &str, stem: &str, suffix: &str, format: OutputFormat) -> String {
    let mut name = String::from(kind);
    if !stem.is_empty() {
        name.push('_');
        name.push_str(stem);
    }
    name.push_str(suffix);
    name.push('.');
    name.push_str(format.extension());
    name
}

fn curve_table(result: &EnsembleResult) -> Table {
    let mut table = Table::new(&["t", "p_mean", "p_sem", "x2_mean", "x2_sem"]);
    for i in 0..result.sample_times.len() {
        table.push_row(vec![
            result.sample_times[i],
            result.p_mean[i],
            result.p_sem[i],
            result.x2_mean[i],
            result.x2_sem[i],
        ]);
    }
    table
}

fn profile_table(l: usize, rho: &[f64]) -> Table {
    let half = (l as i64 - 1) / 2;
    let mut table = Table::new(&["n", "rho_mean"]);
    for (i, &r) in rho.iter().enumerate() {
        table.push_row(vec![(i as i64 - half) as f64, r]);
    }
    table
}

/// Runs every cell of the manifest and writes all artifacts under
/// `manifest.out_dir`. With `checkpoint` set, each cell streams realization
/// records to `checkpoints/<cell>.jsonl` and resumes from them on rerun
/// (checkpoint files are completion-ordered and thread-dependent; they are
/// working state, not part of the reproducible artifact set).
pub fn run_manifest(manifest: &RunManifest, checkpoint: bool) -> Result<RunReport> {
    manifest.validate()?;
    let out_dir = manifest.out_dir.clone();
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    let echo = manifest.to_toml();
    print!("{echo}");
    atomic_write(&out_dir.join("manifest_resolved.toml"), echo.as_bytes())?;

    let cells = manifest.cells();
    eprintln!(
        "sweep grid: {} cell(s), {} realization(s) each",
        cells.len(),
        manifest.n_realizations
    );

    let started = Instant::now();
    let mut reports = Vec::with_capacity(cells.len());
    let mut summary = Table::new(&[
        "w",
        "g",
        "gamma",
        "l0",
        "p_final_mean",
        "p_final_sem",
        "x2_final_mean",
        "x2_final_sem",
        "n_succeeded",
        "mean_se_events",
    ]);

    for (i, cell) in cells.iter().enumerate() {
        let spec = manifest.ensemble_spec(cell);
        let cell_started = Instant::now();
        let result = if checkpoint {
            let dir = out_dir.join("checkpoints");
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            let stem = cell_stem(cell);
            let name = if stem.is_empty() { "cell".to_string() } else { stem };
            ensemble::run_ensemble_checkpointed(&spec, &dir.join(format!("{name}.jsonl")))?
        } else {
            ensemble::run_ensemble(&spec)?
        };

        let stem = cell_stem(cell);
        let mut files = Vec::new();

        let curve_name = file_name("curve", &stem, "", manifest.format);
        curve_table(&result).write(&out_dir.join(&curve_name), manifest.format)?;
        files.push(curve_name);

        for (t, rho) in &result.density_mean {
            let suffix = format!("_t{}", value_token(*t));
            let name = file_name("profile", &stem, &suffix, manifest.format);
            profile_table(manifest.config.l, rho).write(&out_dir.join(&name), manifest.format)?;
            files.push(name);
        }

        let last = result.sample_times.len() - 1;
        summary.push_row(vec![
            cell.w,
            cell.g,
            cell.gamma,
            cell.l0 as f64,
            result.p_mean[last],
            result.p_sem[last],
            result.x2_mean[last],
            result.x2_sem[last],
            result.meta.n_succeeded as f64,
            result.meta.mean_se_events,
        ]);
        eprintln!(
            "cell {}/{}: w={} g={} gamma={} l0={} -> p={:.4} +- {:.4} ({:.1}s)",
            i + 1,
            cells.len(),
            cell.w,
            cell.g,
            cell.gamma,
            cell.l0,
            result.p_mean[last],
            result.p_sem[last],
            cell_started.elapsed().as_secs_f64()
        );
        reports.push(CellReport {
            w: cell.w,
            g: cell.g,
            gamma: cell.gamma,
            l0: cell.l0,
            files,
            n_succeeded: result.meta.n_succeeded,
            mean_se_events: result.meta.mean_se_events,
            p_final_mean: result.p_mean[last],
            p_final_sem: result.p_sem[last],
        });
    }

    let summary_name = format!("summary.{}", manifest.format.extension());
    let summary_path = out_dir.join(&summary_name);
    summary.write(&summary_path, manifest.format)?;

    let sidecar = Sidecar {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        manifest: manifest.clone(),
        total_cells: cells.len(),
        wall_time_s: started.elapsed().as_secs_f64(),
        cells: reports,
    };
    let sidecar_path = out_dir.join("run.json");
    let mut sidecar_json = serde_json::to_string_pretty(&sidecar)?;
    sidecar_json.push('\n');
    atomic_write(&sidecar_path, sidecar_json.as_bytes())?;

    Ok(RunReport {
        out_dir,
        summary_path,
        sidecar_path,
        cells: sidecar.cells,
    })
}

/// Reads the final-time summary rows back (CSV or JSON by extension).
pub fn read_summary(path: &Path) -> Result<Table> {
    Table::read(path)
}
