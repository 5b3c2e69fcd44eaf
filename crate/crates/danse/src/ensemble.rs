//! Disorder-averaged Monte Carlo runs: independent per-realization random
//! streams, parallel execution with deterministic reduction, and an append-only
//! checkpoint format for resumable sweeps.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, sample_se_schedule, Observers, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::model::{initial_state, sample_disorder, SimulationConfig};
use crate::rng::{stream, StreamKind};

/// Which random ingredients are held fixed (stream index 0) across all
/// realizations instead of varying per realization. Freezing isolates one
/// noise source at a time when diagnosing variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FreezeSpec {
    pub disorder: bool,
    pub phases: bool,
    pub emission: bool,
}

/// An ensemble request: how many realizations of which configuration, keyed
/// by a master seed that fully determines every stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_realizations: usize,
    pub master_seed: u64,
    pub config: SimulationConfig,
    #[serde(default)]
    pub freeze: FreezeSpec,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::InvalidParameter("n_realizations must be >= 1".into()));
        }
        self.config.validate()
    }
}

/// Bookkeeping carried alongside the averaged curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub n_realizations: usize,
    pub n_succeeded: usize,
    pub master_seed: u64,
    /// Mean number of spontaneous-emission kicks per realization.
    pub mean_se_events: f64,
}

/// Ensemble averages with standard errors, plus mean density profiles at the
/// configured snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub sample_times: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub p_sem: Vec<f64>,
    pub x2_mean: Vec<f64>,
    pub x2_sem: Vec<f64>,
    /// `(time, mean |c_n|² profile)` at each snapshot time.
    pub density_mean: Vec<(f64, Vec<f64>)>,
    pub meta: EnsembleMeta,
}

/// Runs one realization of the ensemble. Each ingredient (disorder, initial
/// phases, emission events) draws from its own counter-mode stream keyed by
/// `(master_seed, realization index, ingredient)`, so any realization can be
/// reproduced in isolation and freezing one ingredient never shifts another.
pub fn run_realization(spec: &EnsembleSpec, index: u64) -> Result<TrajectoryRecord> {
    let cfg = &spec.config;
    let pick = |frozen: bool| if frozen { 0 } else { index };
    let mut disorder_rng = stream(spec.master_seed, pick(spec.freeze.disorder), StreamKind::Disorder);
    let disorder = sample_disorder(cfg.w, cfg.l, &mut disorder_rng)?;
    let mut phase_rng = stream(spec.master_seed, pick(spec.freeze.phases), StreamKind::Phases);
    let state0 = initial_state(cfg.l0, cfg.l, &mut phase_rng)?;
    let mut emission_rng = stream(spec.master_seed, pick(spec.freeze.emission), StreamKind::Emission);
    let schedule = sample_se_schedule(cfg.gamma, cfg.t_max, &mut emission_rng)?;
    let observers = Observers::standard(cfg);
    evolve(cfg, &disorder, &state0, &schedule, &observers)
}

/// Largest tolerated fraction of failed realizations before the whole
/// ensemble is reported as failed.
const MAX_FAILURE_FRACTION: f64 = 0.10;

fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Deterministic reduction: records are consumed in realization-index order
/// regardless of the order in which workers finished them.
fn reduce(spec: &EnsembleSpec, mut indexed: Vec<(u64, Result<TrajectoryRecord>)>) -> Result<EnsembleResult> {
    indexed.sort_by_key(|(i, _)| *i);
    let total = indexed.len();
    let mut records = Vec::with_capacity(total);
    let mut first_failure = None;
    let mut failed = 0usize;
    for (_, r) in indexed {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failed += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if records.is_empty() || failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::EnsembleFailed {
            failed,
            total,
            first: first_failure.unwrap_or_else(|| "no realizations ran".into()),
        });
    }
    let n = records.len();
    let sample_times = records[0].sample_times.clone();
    let n_times = sample_times.len();
    let mut p_mean = Vec::with_capacity(n_times);
    let mut p_sem = Vec::with_capacity(n_times);
    let mut x2_mean = Vec::with_capacity(n_times);
    let mut x2_sem = Vec::with_capacity(n_times);
    let mut column = vec![0.0; n];
    for j in 0..n_times {
        for (i, r) in records.iter().enumerate() {
            column[i] = r.survival[j];
        }
        let (m, s) = mean_and_sem(&column);
        p_mean.push(m);
        p_sem.push(s);
        for (i, r) in records.iter().enumerate() {
            column[i] = r.second_moment[j];
        }
        let (m, s) = mean_and_sem(&column);
        x2_mean.push(m);
        x2_sem.push(s);
    }
    let mut density_mean = Vec::new();
    for k in 0..records[0].snapshots.len() {
        let t = records[0].snapshots[k].0;
        let l = records[0].snapshots[k].1.len();
        let mut acc = vec![0.0; l];
        for r in &records {
            for (a, &rho) in acc.iter_mut().zip(&r.snapshots[k].1) {
                *a += rho;
            }
        }
        for a in &mut acc {
            *a /= n as f64;
        }
        density_mean.push((t, acc));
    }
    let mean_se_events =
        records.iter().map(|r| r.se_event_count as f64).sum::<f64>() / n as f64;
    Ok(EnsembleResult {
        sample_times,
        p_mean,
        p_sem,
        x2_mean,
        x2_sem,
        density_mean,
        meta: EnsembleMeta {
            n_realizations: total,
            n_succeeded: n,
            master_seed: spec.master_seed,
            mean_se_events,
        },
    })
}

/// Header line of a checkpoint file; a resume refuses to mix files across
/// different ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CheckpointHeader {
    master_seed: u64,
    n_realizations: usize,
    config: SimulationConfig,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointRecord {
    index: u64,
    record: TrajectoryRecord,
}

fn load_checkpoint(
    path: &Path,
    expect: &CheckpointHeader,
) -> Result<HashMap<u64, TrajectoryRecord>> {
    let file = File::open(path)
        .map_err(|e| Error::Checkpoint(format!("cannot open {}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Checkpoint(format!("{} is empty", path.display())))?
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    let header: CheckpointHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    if &header != expect {
        return Err(Error::Checkpoint(format!(
            "{} belongs to a different ensemble (seed {}, n = {})",
            path.display(),
            header.master_seed,
            header.n_realizations
        )));
    }
    let mut done = HashMap::new();
    for line in lines {
        let line = line.map_err(|e| Error::Checkpoint(e.to_string()))?;
        // A torn trailing line from an interrupted run is expected; skip
        // anything that does not parse and recompute that realization.
        if let Ok(rec) = serde_json::from_str::<CheckpointRecord>(&line) {
            done.insert(rec.index, rec.record);
        }
    }
    Ok(done)
}

fn run_inner(spec: &EnsembleSpec, checkpoint: Option<&Path>) -> Result<EnsembleResult> {
    spec.validate()?;
    let header = CheckpointHeader {
        master_seed: spec.master_seed,
        n_realizations: spec.n_realizations,
        config: spec.config.clone(),
    };
    let mut done = HashMap::new();
    let mut writer = None;
    if let Some(path) = checkpoint {
        if path.exists() {
            done = load_checkpoint(path, &header)?;
            let file = OpenOptions::new()
                .append(true)
                .open(path)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            writer = Some(Mutex::new(file));
        } else {
            let mut file = File::create(path).map_err(|e| Error::Checkpoint(e.to_string()))?;
            let line = serde_json::to_string(&header).expect("header serializes");
            writeln!(file, "{line}").map_err(|e| Error::Checkpoint(e.to_string()))?;
            writer = Some(Mutex::new(file));
        }
    }
    let pending: Vec<u64> =
        (0..spec.n_realizations as u64).filter(|i| !done.contains_key(i)).collect();
    let fresh: Vec<(u64, Result<TrajectoryRecord>)> = pending
        .par_iter()
        .map(|&i| {
            let result = run_realization(spec, i);
            if let (Some(w), Ok(record)) = (&writer, &result) {
                let line = serde_json::to_string(&CheckpointRecord {
                    index: i,
                    record: record.clone(),
                })
                .expect("record serializes");
                let mut file = w.lock().expect("checkpoint writer lock");
                // Appends are whole lines under the lock, so a crash leaves at
                // most one torn line at the tail.
                let _ = writeln!(file, "{line}");
                let _ = file.flush();
            }
            (i, result)
        })
        .collect();
    let mut indexed: Vec<(u64, Result<TrajectoryRecord>)> =
        done.into_iter().map(|(i, r)| (i, Ok(r))).collect();
    indexed.extend(fresh);
    reduce(spec, indexed)
}

/// Runs every realization (in parallel when a rayon pool provides threads)
/// and averages the survivors. Fails if more than 10% of realizations error,
/// carrying the first failure message.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    run_inner(spec, None)
}

/// Like [`run_ensemble`], but records each finished realization to an
/// append-only JSON-lines file. A rerun pointed at the same file skips the
/// realizations already stored and produces exactly the same result as an
/// uninterrupted run.
pub fn run_ensemble_checkpointed(spec: &EnsembleSpec, path: &Path) -> Result<EnsembleResult> {
    run_inner(spec, Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;

    fn quick_spec(n: usize, gamma: f64) -> EnsembleSpec {
        let config = SimulationConfig {
            l: 41,
            l0: 3,
            w: 4.0,
            g: 0.0,
            gamma,
            t_max: 30.0,
            snapshot_times: vec![10.0, 30.0],
            ..SimulationConfig::default()
        };
        EnsembleSpec { n_realizations: n, master_seed: 99, config, freeze: FreezeSpec::default() }
    }

    #[test]
    fn single_realization_has_zero_sem() {
        let res = run_ensemble(&quick_spec(1, 0.0)).unwrap();
        assert!(res.p_sem.iter().all(|&s| s == 0.0));
        assert!(res.x2_sem.iter().all(|&s| s == 0.0));
        assert_eq!(res.meta.n_succeeded, 1);
    }

    #[test]
    fn realizations_differ() {
        let spec = quick_spec(2, 0.05);
        let a = run_realization(&spec, 0).unwrap();
        let b = run_realization(&spec, 1).unwrap();
        assert_ne!(a.survival, b.survival);
    }

    #[test]
    fn result_independent_of_thread_count() {
        let spec = quick_spec(6, 0.05);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_ensemble(&spec))
            .unwrap();
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_ensemble(&spec))
            .unwrap();
        assert_eq!(
            serde_json::to_string(&single).unwrap(),
            serde_json::to_string(&multi).unwrap()
        );
    }

    #[test]
    fn full_freeze_collapses_variance() {
        let mut spec = quick_spec(5, 0.05);
        spec.freeze = FreezeSpec { disorder: true, phases: true, emission: true };
        // Every realization is the same computation bit for bit.
        let a = run_realization(&spec, 0).unwrap();
        let b = run_realization(&spec, 4).unwrap();
        assert_eq!(a, b);
        // The sems are zero up to the rounding of mean(n identical values).
        let res = run_ensemble(&spec).unwrap();
        assert!(res.p_sem.iter().all(|&s| s < 1e-13));
        assert!(res.x2_sem.iter().all(|&s| s < 1e-11));
    }

    #[test]
    fn freezing_disorder_still_varies_phases() {
        let mut spec = quick_spec(5, 0.0);
        spec.freeze = FreezeSpec { disorder: true, phases: false, emission: false };
        let res = run_ensemble(&spec).unwrap();
        // Identical lattice, different initial phases: spread still varies.
        assert!(res.x2_sem.iter().any(|&s| s > 0.0));
    }

    #[test]
    fn sem_shrinks_roughly_as_root_n() {
        let small = run_ensemble(&quick_spec(40, 0.05)).unwrap();
        let large = run_ensemble(&EnsembleSpec {
            n_realizations: 160,
            ..quick_spec(40, 0.05)
        })
        .unwrap();
        let j = small.sample_times.len() - 1;
        let ratio = small.x2_sem[j] / large.x2_sem[j];
        // n grows 4x, sem should shrink about 2x; allow generous slop.
        assert!(ratio > 1.3 && ratio < 3.1, "ratio = {ratio}");
    }

    #[test]
    fn snapshot_averages_conserve_weight_without_absorber() {
        let mut spec = quick_spec(4, 0.0);
        spec.config.absorber = None;
        spec.config.norm_drift_budget = 1e-6;
        let res = run_ensemble(&spec).unwrap();
        assert_eq!(res.density_mean.len(), 2);
        for (t, rho) in &res.density_mean {
            let total: f64 = rho.iter().sum();
            assert!((total - 1.0).abs() < 1e-7, "t = {t}: total = {total}");
        }
    }

    #[test]
    fn failure_tolerance_policy() {
        let spec = quick_spec(10, 0.0);
        let make = |fail: usize| -> Vec<(u64, Result<TrajectoryRecord>)> {
            (0..10u64)
                .map(|i| {
                    if (i as usize) < fail {
                        (i, Err(Error::Diverged { t: 1.0, detail: "synthetic".into() }))
                    } else {
                        (i, run_realization(&spec, i))
                    }
                })
                .collect()
        };
        // One failure in ten is tolerated and excluded from the averages.
        let ok = reduce(&spec, make(1)).unwrap();
        assert_eq!(ok.meta.n_succeeded, 9);
        assert_eq!(ok.meta.n_realizations, 10);
        // Two in ten crosses the 10% line.
        match reduce(&spec, make(2)) {
            Err(Error::EnsembleFailed { failed, total, first }) => {
                assert_eq!((failed, total), (2, 10));
                assert!(first.contains("synthetic"));
            }
            other => panic!("expected ensemble failure, got {other:?}"),
        }
    }

    #[test]
    fn checkpoint_resume_matches_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let spec = quick_spec(6, 0.05);
        let full_path = dir.path().join("full.jsonl");
        let full = run_ensemble_checkpointed(&spec, &full_path).unwrap();
        assert_eq!(serde_json::to_string(&full).unwrap(),
                   serde_json::to_string(&run_ensemble(&spec).unwrap()).unwrap());

        // Truncate a copy to header + first three records, then resume.
        let mut text = String::new();
        File::open(&full_path).unwrap().read_to_string(&mut text).unwrap();
        let kept: Vec<&str> = text.lines().take(4).collect();
        let partial_path = dir.path().join("partial.jsonl");
        std::fs::write(&partial_path, kept.join("\n") + "\n").unwrap();
        let resumed = run_ensemble_checkpointed(&spec, &partial_path).unwrap();
        assert_eq!(
            serde_json::to_string(&resumed).unwrap(),
            serde_json::to_string(&full).unwrap()
        );
        // The resumed file now holds every realization exactly once.
        let mut text = String::new();
        File::open(&partial_path).unwrap().read_to_string(&mut text).unwrap();
        assert_eq!(text.lines().count(), 1 + spec.n_realizations);
    }

    #[test]
    fn checkpoint_tolerates_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let spec = quick_spec(4, 0.05);
        let path = dir.path().join("torn.jsonl");
        let full = run_ensemble_checkpointed(&spec, &path).unwrap();
        let mut text = String::new();
        File::open(&path).unwrap().read_to_string(&mut text).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let torn = format!("{}\n{}\n{}", lines[0], lines[1], &lines[2][..lines[2].len() / 2]);
        std::fs::write(&path, torn).unwrap();
        let resumed = run_ensemble_checkpointed(&spec, &path).unwrap();
        assert_eq!(
            serde_json::to_string(&resumed).unwrap(),
            serde_json::to_string(&full).unwrap()
        );
    }

    #[test]
    fn checkpoint_refuses_foreign_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.jsonl");
        let spec = quick_spec(3, 0.0);
        run_ensemble_checkpointed(&spec, &path).unwrap();
        let other = EnsembleSpec { master_seed: 1234, ..spec };
        assert!(matches!(
            run_ensemble_checkpointed(&other, &path),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn rejects_empty_ensemble() {
        let spec = quick_spec(0, 0.0);
        assert!(run_ensemble(&spec).is_err());
    }
}
