//! Post-processing: initial-width scaling collapse of sweep summaries.
//!
//! Input is one or more summary files produced by `run` (columns `g`, `l0`,
//! `p_final_mean`, ...). Rows are grouped by `l0` into survival-versus-g
//! curves, then either the interaction-axis exponent `s` (target `g`) or the
//! survival-axis exponent `nu` within one regime window (target `p`) is
//! fitted. The report carries the fitted exponent, its bootstrap spread, and
//! the full objective curve; a companion file holds the rescaled curves
//! ready for plotting.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use danse::scaling::{
    self, classify_regime, CollapseFit, Regime, SweepCurve,
};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::manifest::OutputFormat;
use crate::output::{atomic_write, Table};

/// Which axis to rescale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CollapseTarget {
    /// Fit `s` in `g_tilde = g * L0^-s` over whole curves.
    G,
    /// Fit `nu` in `p_tilde = p * L0^nu` within one regime window.
    P,
}

/// Regime window for target `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RegimeArg {
    Chaotic,
    SelfTrapped,
}

impl RegimeArg {
    fn to_regime(self) -> Regime {
        match self {
            RegimeArg::Chaotic => Regime::Chaotic,
            RegimeArg::SelfTrapped => Regime::SelfTrapped,
        }
    }
}

/// JSON report written next to the rescaled curves.
#[derive(Debug, Serialize)]
pub struct CollapseReport {
    pub target: String,
    /// Fixed interaction-axis exponent used when target is `p`; equals the
    /// fitted value when target is `g`.
    pub s_exponent: f64,
    pub regime: Option<String>,
    pub fitted_exponent: f64,
    pub fitted_stderr: f64,
    pub objective_at_fit: f64,
    pub objective_at_zero: f64,
    pub l0_values: Vec<usize>,
    pub points_per_curve: Vec<usize>,
    /// `(exponent, objective)` samples across the search interval; `null`
    /// objective marks exponents with no pairwise overlap.
    pub objective_curve: Vec<(f64, Option<f64>)>,
}

/// Builds per-`l0` curves from summary tables. Survival means are clamped to
/// `[0, 1]`: integrator drift can leave means a few parts in 1e4 above unity,
/// which the curve validator rightly rejects.
pub fn curves_from_summaries(paths: &[PathBuf]) -> Result<Vec<SweepCurve>> {
    if paths.is_empty() {
        return Err(CliError::Invalid("no summary files given".into()));
    }
    let mut grouped: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for path in paths {
        let table = Table::read(path)?;
        let col_g = table.column("g")?;
        let col_l0 = table.column("l0")?;
        let col_p = table.column("p_final_mean")?;
        for row in &table.rows {
            let l0 = row[col_l0];
            if l0 < 1.0 || l0.fract() != 0.0 {
                return Err(CliError::Invalid(format!(
                    "{}: l0 column holds non-integer {l0}",
                    path.display()
                )));
            }
            grouped
                .entry(l0 as usize)
                .or_default()
                .push((row[col_g], row[col_p].clamp(0.0, 1.0)));
        }
    }
    if grouped.len() < 2 {
        return Err(CliError::Invalid(format!(
            "need at least 2 distinct l0 values across the input files, got {}",
            grouped.len()
        )));
    }
    let mut curves = Vec::new();
    for (l0, mut points) in grouped {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        let (g_values, p_values) = points.into_iter().unzip();
        curves.push(SweepCurve { l0, g_values, p_values });
    }
    Ok(curves)
}

fn objective_curve(
    search: (f64, f64),
    eval: impl Fn(f64) -> Result<f64>,
) -> Vec<(f64, Option<f64>)> {
    const POINTS: usize = 81;
    (0..POINTS)
        .map(|i| {
            let x = search.0 + (search.1 - search.0) * i as f64 / (POINTS - 1) as f64;
            (x, eval(x).ok())
        })
        .collect()
}

/// Fits the requested exponent and writes `collapse_report.json` plus
/// `rescaled_curves.{csv,json}` under `out_dir`. Returns the report.
pub fn run_collapse(
    paths: &[PathBuf],
    target: CollapseTarget,
    s_exponent: f64,
    regime: RegimeArg,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<CollapseReport> {
    let curves = curves_from_summaries(paths)?;
    let l0_values: Vec<usize> = curves.iter().map(|c| c.l0).collect();
    let points_per_curve: Vec<usize> = curves.iter().map(|c| c.g_values.len()).collect();

    let (report, rescaled) = match target {
        CollapseTarget::G => {
            let search = (0.0, 2.0);
            let fit: CollapseFit = scaling::fit_collapse_exponent(&curves, search)?;
            let at_zero = scaling::collapse_objective(&curves, 0.0)?;
            let curve = objective_curve(search, |s| {
                scaling::collapse_objective(&curves, s).map_err(CliError::from)
            });
            let mut table = Table::new(&["l0", "g", "g_tilde", "p"]);
            for c in &curves {
                for (&g, &p) in c.g_values.iter().zip(&c.p_values) {
                    table.push_row(vec![c.l0 as f64, g, scaling::scaled_g(g, c.l0, fit.s), p]);
                }
            }
            (
                CollapseReport {
                    target: "g".into(),
                    s_exponent: fit.s,
                    regime: None,
                    fitted_exponent: fit.s,
                    fitted_stderr: fit.s_stderr,
                    objective_at_fit: fit.objective,
                    objective_at_zero: at_zero,
                    l0_values,
                    points_per_curve,
                    objective_curve: curve,
                },
                table,
            )
        }
        CollapseTarget::P => {
            let search = (0.0, 1.0);
            let window = regime.to_regime();
            let fit = scaling::fit_p_scaling_exponent(&curves, s_exponent, window, search)?;
            let at_zero = scaling::p_scaling_objective(&curves, s_exponent, 0.0, window)?;
            let curve = objective_curve(search, |nu| {
                scaling::p_scaling_objective(&curves, s_exponent, nu, window)
                    .map_err(CliError::from)
            });
            let mut table = Table::new(&["l0", "g", "g_tilde", "p", "p_tilde", "in_window"]);
            for c in &curves {
                for (&g, &p) in c.g_values.iter().zip(&c.p_values) {
                    let g_tilde = scaling::scaled_g(g, c.l0, s_exponent);
                    let in_window = classify_regime(g_tilde) == window;
                    table.push_row(vec![
                        c.l0 as f64,
                        g,
                        g_tilde,
                        p,
                        scaling::scaled_p(p, c.l0, fit.s),
                        in_window as u8 as f64,
                    ]);
                }
            }
            (
                CollapseReport {
                    target: "p".into(),
                    s_exponent,
                    regime: Some(format!("{window:?}")),
                    fitted_exponent: fit.s,
                    fitted_stderr: fit.s_stderr,
                    objective_at_fit: fit.objective,
                    objective_at_zero: at_zero,
                    l0_values,
                    points_per_curve,
                    objective_curve: curve,
                },
                table,
            )
        }
    };

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut report_json = serde_json::to_string_pretty(&report)?;
    report_json.push('\n');
    atomic_write(&out_dir.join("collapse_report.json"), report_json.as_bytes())?;
    rescaled.write(
        &out_dir.join(format!("rescaled_curves.{}", format.extension())),
        format,
    )?;
    Ok(report)
}
