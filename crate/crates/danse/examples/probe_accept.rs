//! Dev probe for picking acceptance-test parameters: runs reduced-size
//! versions of the statistically delicate checks and prints the measured
//! margins. Select a stage by name: c2, c45, c6, c7, c8.

use std::time::Instant;

use danse::ensemble::{run_ensemble, EnsembleSpec, FreezeSpec};
use danse::model::{energy, initial_state, sample_disorder, SimulationConfig};
use danse::observables::{
    default_fit_window, fit_loc_length, shape_classify, DensityProfile,
};
use danse::rng::{stream, StreamKind};
use danse::scaling::{
    collapse_objective, fit_collapse_exponent, fit_p_scaling_exponent, p_scaling_objective,
    scaled_g, Regime, SweepCurve,
};
use danse::dynamics::Stepper;
use danse::model::{absorber_profile, index_of_site, AbsorberSpec, DisorderRealization, LatticeState};
use num_complex::Complex64;

fn bessel_j(n: i64, x: f64) -> f64 {
    const NODES: usize = 1024;
    let mut acc = 0.0;
    for j in 0..NODES {
        let theta = std::f64::consts::TAU * j as f64 / NODES as f64;
        acc += (n as f64 * theta - x * theta.sin()).cos();
    }
    acc / NODES as f64
}

fn stage_c3() {
    let l = 101usize;
    for amplitude in [1.0, 10.0, 0.05, 0.2, 5.0] {
        let spec = AbsorberSpec { amplitude, ..AbsorberSpec::default() };
        let absorber = absorber_profile(&spec, l).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); l];
        c[(l - 1) / 2] = Complex64::new(1.0, 0.0);
        let state0 = LatticeState { c, t: 0.0 };
        let disorder = DisorderRealization { v: vec![0.0; l] };
        let mut st = Stepper::new(&state0, &disorder, 0.0, &absorber).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for k in 0..=90 {
            let t = 20.0 + 0.5 * k as f64;
            st.advance_to(t, 0.01);
            let rho = st.densities();
            let excess: f64 = (-30..=30i64)
                .map(|n| {
                    let j = bessel_j(n, 2.0 * t);
                    rho[index_of_site(n, l)] - j * j
                })
                .sum();
            worst = worst.max(excess);
        }
        println!("c3 amplitude={amplitude}: max excess over t in [20, 65] = {worst:+.4e}");
    }
}

fn base_config() -> SimulationConfig {
    SimulationConfig { t_max: 1e4, snapshot_times: vec![1e4], ..SimulationConfig::default() }
}

fn p_final(spec: &EnsembleSpec) -> (f64, f64, Vec<f64>) {
    let res = run_ensemble(spec).unwrap();
    let j = res.sample_times.len() - 1;
    (res.p_mean[j], res.p_sem[j], res.density_mean.last().map(|(_, r)| r.clone()).unwrap_or_default())
}

fn stage_c2() {
    for g in [0.0, 10.0] {
        for seed in 1u64..6 {
            let config = SimulationConfig {
                w: 4.0,
                g,
                t_max: 1e3,
                absorber: None,
                norm_drift_budget: 5e-9,
                ..SimulationConfig::default()
            };
            let mut d = stream(seed, 0, StreamKind::Disorder);
            let disorder = sample_disorder(4.0, config.l, &mut d).unwrap();
            let mut ph = stream(seed, 0, StreamKind::Phases);
            let state0 = initial_state(3, config.l, &mut ph).unwrap();
            let e0 = energy(&state0, &disorder, g);
            let dt = config.base_dt(state0.densities().iter().cloned().fold(0.0, f64::max));
            let mut st = Stepper::new(&state0, &disorder, g, &[]).unwrap();
            let t0 = Instant::now();
            st.advance_to(1e3, dt);
            let final_state = st.to_state();
            let e1 = energy(&final_state, &disorder, g);
            println!(
                "c2 g={g} seed={seed}: |H0|={:.4} norm_drift={:+.3e} energy_rel={:+.3e} dt={:.3e} ({:.2}s)",
                e0.abs(),
                st.norm() - 1.0,
                (e1 - e0) / e0.abs().max(1e-300),
                dt,
                t0.elapsed().as_secs_f64()
            );
        }
    }
}

fn stage_c45() {
    let n = 20;
    for gamma in [0.0, 1e-3] {
        let config = SimulationConfig { w: 4.0, g: 0.0, gamma, ..base_config() };
        let spec = EnsembleSpec {
            n_realizations: n,
            master_seed: 0xC450,
            config,
            freeze: FreezeSpec::default(),
        };
        let t0 = Instant::now();
        let (p, sem, rho) = p_final(&spec);
        // Trim the absorber skirt before fitting shapes.
        let c = (rho.len() - 1) / 2;
        let trimmed: Vec<f64> = rho[c - 38..=c + 38].to_vec();
        let prof = DensityProfile::from_rho(trimmed);
        let shape = shape_classify(&prof).unwrap();
        let full = DensityProfile::from_rho(rho);
        let fit = fit_loc_length(&full, default_fit_window(101, 10));
        println!(
            "c45 gamma={gamma}: p={p:.4}+-{sem:.4} shape={:?} (exp {:.3e} gauss {:.3e}) ell={:?} ({:.1}s)",
            shape.label,
            shape.score_exp,
            shape.score_gauss,
            fit.map(|f| (f.ell, f.r2)),
            t0.elapsed().as_secs_f64()
        );
    }
}

fn stage_c6() {
    let n = 12;
    for w in [2.0, 4.0, 8.0] {
        for gamma in [1e-4, 1e-3, 3.16e-3, 1e-2] {
            let config = SimulationConfig { w, g: 0.0, gamma, ..base_config() };
            let spec = EnsembleSpec {
                n_realizations: n,
                master_seed: 0xC600,
                config,
                freeze: FreezeSpec::default(),
            };
            let t0 = Instant::now();
            let (p, sem, _) = p_final(&spec);
            println!(
                "c6 W={w} gamma={gamma:.2e}: p={p:.4}+-{sem:.4} ({:.1}s)",
                t0.elapsed().as_secs_f64()
            );
        }
    }
}

fn stage_c7() {
    let cells: [(f64, f64, usize); 3] = [(10.0, 0.0, 12), (320.0, 0.0, 6), (320.0, 1e-3, 6)];
    for (g, gamma, n) in cells {
        let config = SimulationConfig { w: 4.0, g, gamma, ..base_config() };
        let spec = EnsembleSpec {
            n_realizations: n,
            master_seed: 0xC700,
            config,
            freeze: FreezeSpec::default(),
        };
        let t0 = Instant::now();
        let (p, sem, _) = p_final(&spec);
        println!(
            "c7 g={g} gamma={gamma}: p={p:.4}+-{sem:.4} n={n} ({:.1}s)",
            t0.elapsed().as_secs_f64()
        );
    }
}

fn stage_c8(w: f64, gamma: f64, master_seed: u64) {
    let n: usize = std::env::args()
        .nth(2)
        .and_then(|a| a.parse().ok())
        .unwrap_or(24);
    let widths = [3usize, 7, 13, 21];
    let half_decade = 3.162_277_660_168_379_5_f64;
    let gt_grid: Vec<f64> = (0..9).map(|k| 0.005 * half_decade.powi(k)).collect();
    let mut curves = Vec::new();
    let t_all = Instant::now();
    for &l0 in &widths {
        let mut g_values = Vec::new();
        let mut p_values = Vec::new();
        for &gt in &gt_grid {
            let g = gt * (l0 as f64).powf(0.76);
            let config = SimulationConfig {
                w,
                l0,
                g,
                gamma,
                norm_drift_budget: 1e-2,
                ..base_config()
            };
            let spec = EnsembleSpec {
                n_realizations: n,
                master_seed,
                config,
                freeze: FreezeSpec::default(),
            };
            let t0 = Instant::now();
            let (p, sem, _) = p_final(&spec);
            println!(
                "c8 L0={l0} g={g:.3} (gt={gt:.3}): p={p:.4}+-{sem:.4} ({:.1}s)",
                t0.elapsed().as_secs_f64()
            );
            g_values.push(g);
            p_values.push(p.clamp(0.0, 1.0));
        }
        curves.push(SweepCurve { l0, g_values, p_values });
    }
    for s in [0.0, 0.3, 0.5, 0.6, 0.7, 0.76, 0.8, 0.9, 1.0, 1.1, 1.23, 1.4, 1.7, 2.0] {
        println!("c8 objective(s={s}): {:.4e}", collapse_objective(&curves, s).unwrap());
    }
    let fit = fit_collapse_exponent(&curves, (0.0, 2.0)).unwrap();
    let at_zero = collapse_objective(&curves, 0.0).unwrap();
    println!(
        "c8 fit: s={:.3}+-{:.3} objective={:.3e} objective(0)={:.3e} ratio={:.3}",
        fit.s,
        fit.s_stderr,
        fit.objective,
        at_zero,
        fit.objective / at_zero
    );
    for (regime, nu) in [(Regime::Chaotic, 0.52), (Regime::SelfTrapped, 0.31)] {
        let at_nu = p_scaling_objective(&curves, 0.76, nu, regime);
        let at_no = p_scaling_objective(&curves, 0.76, 0.0, regime);
        let best = fit_p_scaling_exponent(&curves, 0.76, regime, (0.0, 1.0));
        println!(
            "c9 {regime:?} at s=0.76: obj(nu={nu})={at_nu:?} obj(0)={at_no:?} fitted={:?}",
            best.map(|b| (b.s, b.objective))
        );
    }
    println!("c8 total: {:.1}s", t_all.elapsed().as_secs_f64());
    let _ = scaled_g(1.0, 3, 0.76);
}

fn main() {
    let stage = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    match stage.as_str() {
        "c3" => stage_c3(),
        "c2" => stage_c2(),
        "c45" => stage_c45(),
        "c6" => stage_c6(),
        "c7" => stage_c7(),
        "c8" => stage_c8(1.0, 1e-4, 0xC800),
        "c8w4" => stage_c8(4.0, 1e-5, 0xC801),
        _ => {
            stage_c2();
            stage_c45();
            stage_c6();
            stage_c7();
            stage_c8(1.0, 1e-4, 0xC800);
        }
    }
}
