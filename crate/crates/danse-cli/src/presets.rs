//! Bundled experiment presets.
//!
//! Each preset is a ready-to-run manifest for one of the five standard
//! experiments: survival versus decoherence rate, density-profile
//! progression, survival versus interaction strength, and the two
//! initial-width scaling studies. Full scale means `t_max = 1e5` and 500
//! realizations per cell; `--scale x` multiplies `t_max` and the realization
//! count by `x` and divides every spontaneous-emission rate by `x`, so the
//! expected event count per run — the quantity the physics cares about — is
//! preserved at reduced cost. The default scale 0.1 runs each preset on a
//! workstation in minutes to tens of minutes.

use std::path::PathBuf;

use crate::error::{CliError, Result};
use crate::manifest::{OutputFormat, RunManifest, SweepAxes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PresetName {
    /// Survival probability vs decoherence rate for several disorder strengths.
    Fig1,
    /// Density-profile progression with increasing decoherence (no interaction).
    Fig2,
    /// Survival vs interaction strength: localized, chaotic, self-trapped.
    Fig3,
    /// Survival vs interaction strength across initial widths (weak disorder).
    Fig4,
    /// Same sweep family as fig4 at moderate disorder, for survival rescaling.
    Fig5,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig1 => "fig1",
            PresetName::Fig2 => "fig2",
            PresetName::Fig3 => "fig3",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5 => "fig5",
        }
    }
}

const FULL_T_MAX: f64 = 1.0e5;
const FULL_REALIZATIONS: f64 = 500.0;

/// `count` log-spaced values from `start`, three per decade.
fn third_decade_grid(start: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| start * 10f64.powf(k as f64 / 3.0))
        .collect()
}

/// `count` log-spaced values from `start`, two per decade.
fn half_decade_grid(start: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| start * 10f64.powf(k as f64 / 2.0))
        .collect()
}

/// Builds the manifest for a named preset at the given scale and seed.
pub fn preset_manifest(name: PresetName, scale: f64, seed: u64) -> Result<RunManifest> {
    if !(scale > 0.0 && scale <= 1.0) || !scale.is_finite() {
        return Err(CliError::Invalid(format!(
            "--scale must be in (0, 1], got {scale}"
        )));
    }
    let t_max = FULL_T_MAX * scale;
    let n_realizations = (FULL_REALIZATIONS * scale).round().max(1.0) as usize;
    // Rates are divided by `scale` so gamma * t_max (expected kicks per run)
    // matches the full-scale experiment.
    let rate = |gamma: f64| gamma / scale;

    let mut manifest = RunManifest {
        n_realizations,
        seed,
        out_dir: PathBuf::from(format!("out_{}", name.as_str())),
        format: OutputFormat::Csv,
        ..RunManifest::default()
    };
    manifest.config.t_max = t_max;
    // Heavy-interaction cells need a loose drift allotment to keep the step
    // size practical; observed drift stays orders of magnitude below it.
    manifest.config.norm_drift_budget = 1.0e-2;

    match name {
        PresetName::Fig1 => {
            manifest.config.l0 = 21;
            manifest.config.g = 0.0;
            manifest.sweep = SweepAxes {
                w: Some(vec![2.0, 3.0, 4.0, 6.0, 8.0]),
                gamma: Some(half_decade_grid(1.0e-6, 11).into_iter().map(rate).collect()),
                ..SweepAxes::default()
            };
        }
        PresetName::Fig2 => {
            manifest.config.w = 4.0;
            manifest.config.l0 = 3;
            manifest.config.g = 0.0;
            manifest.config.snapshot_times = vec![t_max];
            manifest.sweep = SweepAxes {
                gamma: Some(vec![0.0, rate(1.0e-5), rate(1.0e-4), rate(1.0e-3)]),
                ..SweepAxes::default()
            };
        }
        PresetName::Fig3 => {
            manifest.config.w = 4.0;
            manifest.config.l0 = 3;
            manifest.sweep = SweepAxes {
                gamma: Some(vec![0.0, rate(1.0e-5), rate(1.0e-4), rate(1.0e-3)]),
                g: Some(third_decade_grid(0.1, 12)),
                ..SweepAxes::default()
            };
        }
        PresetName::Fig4 => {
            manifest.config.w = 1.0;
            manifest.config.gamma = rate(1.0e-5);
            manifest.sweep = SweepAxes {
                l0: Some(vec![3, 7, 13, 21, 31, 41]),
                g: Some(third_decade_grid(0.01, 15)),
                ..SweepAxes::default()
            };
        }
        PresetName::Fig5 => {
            manifest.config.w = 4.0;
            manifest.config.gamma = rate(1.0e-5);
            manifest.sweep = SweepAxes {
                l0: Some(vec![7, 13, 21, 31, 41]),
                g: Some(third_decade_grid(0.01, 15)),
                ..SweepAxes::default()
            };
        }
    }
    manifest.validate()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_at_both_scales() {
        for name in [
            PresetName::Fig1,
            PresetName::Fig2,
            PresetName::Fig3,
            PresetName::Fig4,
            PresetName::Fig5,
        ] {
            for scale in [0.1, 1.0] {
                let m = preset_manifest(name, scale, 0).unwrap();
                assert!(m.sweep.cell_count() >= 4, "{name:?} grid too small");
            }
        }
    }

    #[test]
    fn scale_preserves_expected_event_count() {
        let full = preset_manifest(PresetName::Fig4, 1.0, 0).unwrap();
        let desk = preset_manifest(PresetName::Fig4, 0.1, 0).unwrap();
        assert_eq!(full.config.t_max, 1.0e5);
        assert_eq!(desk.config.t_max, 1.0e4);
        assert_eq!(full.n_realizations, 500);
        assert_eq!(desk.n_realizations, 50);
        let events_full = full.config.gamma * full.config.t_max;
        let events_desk = desk.config.gamma * desk.config.t_max;
        assert!((events_full - events_desk).abs() < 1e-12);
        assert!((desk.config.gamma - 1.0e-4).abs() < 1e-19);
    }

    #[test]
    fn grids_match_the_published_spans() {
        let fig1 = preset_manifest(PresetName::Fig1, 1.0, 0).unwrap();
        assert_eq!(fig1.sweep.w.as_deref(), Some(&[2.0, 3.0, 4.0, 6.0, 8.0][..]));
        let gammas = fig1.sweep.gamma.unwrap();
        assert_eq!(gammas.len(), 11);
        assert!((gammas[0] - 1e-6).abs() < 1e-21);
        assert!((gammas[10] - 1e-1).abs() < 1e-12);

        let fig3 = preset_manifest(PresetName::Fig3, 1.0, 0).unwrap();
        let gs = fig3.sweep.g.unwrap();
        assert!(gs.iter().any(|&g| g > 320.0), "sweep must reach past g=320");

        let fig4 = preset_manifest(PresetName::Fig4, 1.0, 0).unwrap();
        assert_eq!(fig4.sweep.l0.as_deref(), Some(&[3, 7, 13, 21, 31, 41][..]));
        assert_eq!(fig4.config.w, 1.0);
    }
}
