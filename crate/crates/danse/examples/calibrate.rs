//! Integrator calibration probe: step-kernel throughput and empirical norm
//! drift for representative parameter sets. Run with
//! `cargo run -p danse --example calibrate --release`.

use std::time::Instant;

use danse::dynamics::Stepper;
use danse::model::{initial_state, sample_disorder, SimulationConfig};
use danse::rng::realization_streams;

fn main() {
    // Throughput: L=101, typical disorder, nonlinearity on.
    let mut streams = realization_streams(1, 0);
    let d = sample_disorder(4.0, 101, &mut streams.disorder).unwrap();
    let st = initial_state(3, 101, &mut streams.phases).unwrap();
    let mut stepper = Stepper::new(&st, &d, 10.0, &[]).unwrap();
    let n_steps = 2_000_000usize;
    let t0 = Instant::now();
    for _ in 0..n_steps {
        stepper.step_once(1e-3);
    }
    let dt_wall = t0.elapsed().as_secs_f64();
    println!(
        "throughput: {:.0} ns/step ({:.2e} steps/s), final norm {:.12}",
        dt_wall / n_steps as f64 * 1e9,
        n_steps as f64 / dt_wall,
        stepper.norm()
    );

    // Norm drift vs prediction for several configs. drift_pred uses the
    // worst-case all-weight-at-E_scale bound.
    let cases = [
        // (w, g, l0, t_end, dt)
        (4.0, 0.0, 3, 1000.0, 2.4e-3),
        (4.0, 0.0, 3, 1000.0, 0.02),
        (4.0, 10.0, 3, 1000.0, 1.2e-3),
        (4.0, 10.0, 3, 1000.0, 8.6e-3),
        (4.0, 320.0, 3, 20.0, 3.3e-4),
        (4.0, 320.0, 3, 20.0, 6.6e-4),
    ];
    for (w, g, l0, t_end, dt) in cases {
        let mut s = realization_streams(2, 0);
        let d = sample_disorder(w, 101, &mut s.disorder).unwrap();
        let st = initial_state(l0, 101, &mut s.phases).unwrap();
        let cfg = SimulationConfig {
            w,
            g,
            l0,
            t_max: t_end,
            absorber: None,
            ..SimulationConfig::default()
        };
        let e = cfg.e_scale(1.0 / l0 as f64);
        let mut stepper = Stepper::new(&st, &d, g, &[]).unwrap();
        let n = (t_end / dt).round() as usize;
        let mut max_rho: f64 = 0.0;
        for i in 0..n {
            stepper.step_once(dt);
            if i % 512 == 0 {
                let m = stepper.densities().iter().cloned().fold(0.0, f64::max);
                max_rho = max_rho.max(m);
            }
        }
        let drift = stepper.norm() - 1.0;
        let pred = t_end * e.powi(6) * dt.powi(5) / 72.0;
        println!(
            "W={w} g={g:5} L0={l0} t={t_end:6} dt={dt:7.1e}: drift={drift:+.3e} pred(-)={pred:.3e} max_rho={max_rho:.3}",
        );
    }
}
