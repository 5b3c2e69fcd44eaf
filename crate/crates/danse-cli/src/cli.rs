//! Command-line surface: argument types and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::collapse::{self, CollapseTarget, RegimeArg};
use crate::error::{CliError, Result};
use crate::manifest::{load_manifest, OutputFormat, RunManifest};
use crate::presets::{preset_manifest, PresetName};
use crate::runner;
use crate::units;

/// Disordered nonlinear lattice sweeps: seeded ensembles, figure presets,
/// scaling collapse, and unit conversions.
#[derive(Debug, Parser)]
#[command(name = "danse", version, about)]
pub struct Cli {
    /// Worker threads for ensemble realizations (default: all cores; the
    /// DANSE_THREADS environment variable is a lower-precedence override).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every cell of a manifest and write curve/summary files.
    Run(RunArgs),
    /// Print a ready-to-run manifest for one of the bundled experiments.
    Preset(PresetArgs),
    /// Fit a scaling collapse from run summaries.
    Collapse(CollapseArgs),
    /// Convert laser/atom parameters to lattice units.
    Units(UnitsArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Manifest file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the manifest's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the manifest's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the manifest's data format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Stream per-realization records to checkpoint files and resume from
    /// them on rerun.
    #[arg(long)]
    pub checkpoint: bool,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// Which experiment.
    #[arg(value_enum)]
    pub name: PresetName,
    /// Scale factor in (0, 1]: multiplies t_max and the realization count,
    /// divides emission rates (1.0 = full published scale).
    #[arg(long, default_value_t = 0.1)]
    pub scale: f64,
    /// Master seed baked into the manifest.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory baked into the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Data format baked into the manifest.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct CollapseArgs {
    /// Summary files from `run` (CSV or JSON).
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Which axis to rescale: `g` fits the interaction exponent, `p` fits
    /// the survival exponent inside one regime window.
    #[arg(long, value_enum, default_value_t = CollapseTarget::G)]
    pub target: CollapseTarget,
    /// Interaction-axis exponent used to place regime windows when the
    /// target is `p`.
    #[arg(long, default_value_t = 0.76)]
    pub s_exponent: f64,
    /// Regime window for target `p`.
    #[arg(long, value_enum, default_value_t = RegimeArg::Chaotic)]
    pub regime: RegimeArg,
    /// Report directory.
    #[arg(long, default_value = "collapse_out")]
    pub out: PathBuf,
    /// Rescaled-curve file format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct UnitsArgs {
    /// Natural linewidth (sets the rate unit).
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
    /// Rabi frequency, in linewidths.
    #[arg(long)]
    pub omega: f64,
    /// Laser detuning, in linewidths.
    #[arg(long)]
    pub delta: f64,
    /// Lattice time units per second; enables the reduced-rate output.
    #[arg(long)]
    pub t_over_hbar: Option<f64>,
    /// Emit JSON instead of aligned text.
    #[arg(long)]
    pub json: bool,
}

/// Applies `--seed/--out/--format` on top of a loaded manifest, logging each
/// override that changes a file-supplied value.
fn apply_overrides(
    manifest: &mut RunManifest,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
) {
    if let Some(seed) = seed {
        if seed != manifest.seed {
            eprintln!(
                "note: --seed {seed} overrides manifest seed {}",
                manifest.seed
            );
        }
        manifest.seed = seed;
    }
    if let Some(out) = out {
        if out != manifest.out_dir {
            eprintln!(
                "note: --out {} overrides manifest out_dir {}",
                out.display(),
                manifest.out_dir.display()
            );
        }
        manifest.out_dir = out;
    }
    if let Some(format) = format {
        if format != manifest.format {
            eprintln!("note: --format overrides manifest format");
        }
        manifest.format = format;
    }
}

/// Executes one parsed command.
pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let mut manifest = load_manifest(&args.config)?;
            apply_overrides(&mut manifest, args.seed, args.out, args.format);
            let report = runner::run_manifest(&manifest, args.checkpoint)?;
            eprintln!(
                "wrote {} cell(s) under {}",
                report.cells.len(),
                report.out_dir.display()
            );
            Ok(())
        }
        Command::Preset(args) => {
            let mut manifest = preset_manifest(args.name, args.scale, args.seed)?;
            if let Some(out) = args.out {
                manifest.out_dir = out;
            }
            if let Some(format) = args.format {
                manifest.format = format;
            }
            print!("{}", manifest.to_toml());
            eprintln!(
                "preset {}: {} cell(s) x {} realization(s), t_max={}",
                args.name.as_str(),
                manifest.sweep.cell_count(),
                manifest.n_realizations,
                manifest.config.t_max
            );
            Ok(())
        }
        Command::Collapse(args) => {
            let report = collapse::run_collapse(
                &args.files,
                args.target,
                args.s_exponent,
                args.regime,
                &args.out,
                args.format,
            )?;
            println!(
                "fitted exponent = {:.4} +- {:.4} (objective {:.4e}, at zero {:.4e})",
                report.fitted_exponent,
                report.fitted_stderr,
                report.objective_at_fit,
                report.objective_at_zero
            );
            eprintln!("report written to {}", args.out.display());
            Ok(())
        }
        Command::Units(args) => {
            let report = units::units_report(args.gamma0, args.omega, args.delta, args.t_over_hbar)?;
            if args.json {
                let mut text = serde_json::to_string_pretty(&report)?;
                text.push('\n');
                print!("{text}");
            } else {
                print!("{}", report.render_text());
            }
            Ok(())
        }
    }
}

/// Resolves the worker-thread count: flag first, then the DANSE_THREADS
/// environment variable.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be >= 1".into()));
        }
        return Ok(Some(n));
    }
    match std::env::var("DANSE_THREADS") {
        Ok(text) => {
            let n: usize = text.trim().parse().map_err(|_| {
                CliError::Invalid(format!("DANSE_THREADS must be a positive integer, got {text:?}"))
            })?;
            if n == 0 {
                return Err(CliError::Invalid("DANSE_THREADS must be >= 1".into()));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}
