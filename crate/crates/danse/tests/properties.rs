//! Property tests of structural invariants across randomized inputs.

use danse::dynamics::{apply_kick, evolve, sample_se_schedule, Observers};
use danse::model::{
    initial_state, sample_disorder, site_of_index, LatticeState, SimulationConfig,
};
use danse::observables::{second_moment, shape_classify, DensityProfile};
use danse::rng::{stream, StreamKind};
use danse::scaling::{classify_regime, scaled_g};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn initial_states_are_normalized_boxes(
        k0 in 0usize..=20,
        kl in 30usize..=100,
        seed in any::<u64>(),
    ) {
        let (l0, l) = (2 * k0 + 1, 2 * kl + 1);
        let mut s = stream(seed, 0, StreamKind::Phases);
        let st = initial_state(l0, l, &mut s).unwrap();
        prop_assert!((st.norm() - 1.0).abs() < 1e-12);
        let occupied = st.c.iter().filter(|c| c.norm_sqr() > 0.0).count();
        prop_assert_eq!(occupied, l0);
        for (i, c) in st.c.iter().enumerate() {
            let inside = site_of_index(i, l).unsigned_abs() as usize <= (l0 - 1) / 2;
            prop_assert_eq!(c.norm_sqr() > 0.0, inside);
        }
    }

    #[test]
    fn kicks_never_change_densities(
        seed in any::<u64>(),
        theta in 0.0..std::f64::consts::PI,
        kl in 5usize..=40,
    ) {
        let l = 2 * kl + 1;
        let mut s = stream(seed, 1, StreamKind::Phases);
        let st = initial_state((l + 1) / 2 | 1, l, &mut s).unwrap();
        let kicked = apply_kick(&st, theta);
        for (a, b) in st.c.iter().zip(&kicked.c) {
            prop_assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn schedules_are_sorted_and_within_horizon(
        gamma in 0.0..0.5f64,
        t_max in 1.0..200.0f64,
        seed in any::<u64>(),
    ) {
        let mut s = stream(seed, 2, StreamKind::Emission);
        let sched = sample_se_schedule(gamma, t_max, &mut s).unwrap();
        let mut prev = 0.0;
        for &t in sched.times() {
            prop_assert!(t > prev && t <= t_max);
            prev = t;
        }
        for &a in sched.angles() {
            prop_assert!((0.0..std::f64::consts::TAU).contains(&a));
        }
    }

    #[test]
    fn step_size_respects_every_cap(
        w in 0.0..10.0f64,
        g in 0.0..400.0f64,
        t_exp in 1.0..5.0f64,
        budget_exp in -9.0..-1.0f64,
        max_rho in 0.01..1.0f64,
    ) {
        let config = SimulationConfig {
            w,
            g,
            t_max: 10f64.powf(t_exp),
            norm_drift_budget: 10f64.powf(budget_exp),
            ..SimulationConfig::default()
        };
        let dt = config.base_dt(max_rho);
        let e = config.e_scale(max_rho);
        prop_assert!(dt <= config.dt_max);
        prop_assert!(dt <= 0.1 / e * (1.0 + 1e-12));
        let worst_drift = config.t_max * e.powi(6) * dt.powi(5) / 72.0;
        prop_assert!(worst_drift <= config.norm_drift_budget * (1.0 + 1e-9));
    }

    #[test]
    fn regime_is_a_function_of_the_reduced_strength(
        g in 1e-3..1e3f64,
        l0 in 1usize..=21,
        lambda in 2usize..=5,
        s in 0.0..2.0f64,
    ) {
        let before = scaled_g(g, l0, s);
        let after = scaled_g(g * (lambda as f64).powf(s), l0 * lambda, s);
        // The two ways of computing g̃ agree to rounding; stay clear of the
        // regime thresholds where a last-ulp difference could flip the label.
        prop_assume!((before / 0.1 - 1.0).abs() > 1e-9);
        prop_assume!((before / 10.0 - 1.0).abs() > 1e-9);
        prop_assert!((after / before - 1.0).abs() < 1e-12);
        prop_assert_eq!(classify_regime(before), classify_regime(after));
    }

    #[test]
    fn spread_is_reflection_exact(
        pool in proptest::collection::vec(0.0..1.0f64, 101..=101),
        kl in 2usize..=50,
    ) {
        let rho: Vec<f64> = pool.into_iter().take(2 * kl + 1).collect();
        prop_assume!(rho.iter().sum::<f64>() > 0.0);
        let forward = DensityProfile::from_rho(rho.clone());
        let mirrored = DensityProfile::from_rho(rho.into_iter().rev().collect());
        let a = second_moment(&forward).unwrap();
        let b = second_moment(&mirrored).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn shape_label_ignores_overall_scale(
        ell in 2.0..30.0f64,
        scale_exp in -6.0..6.0f64,
        gaussian in any::<bool>(),
    ) {
        let rho: Vec<f64> = (0..101)
            .map(|i| {
                let n = site_of_index(i, 101) as f64;
                if gaussian {
                    (-n * n / (ell * ell)).exp()
                } else {
                    (-2.0 * n.abs() / ell).exp()
                }
            })
            .collect();
        let scaled: Vec<f64> =
            rho.iter().map(|r| r * 10f64.powf(scale_exp)).collect();
        let a = shape_classify(&DensityProfile::from_rho(rho)).unwrap();
        let b = shape_classify(&DensityProfile::from_rho(scaled)).unwrap();
        prop_assert_eq!(a.label, b.label);
    }

    #[test]
    fn config_survives_serialization(
        w in 0.0..10.0f64,
        g in 0.0..400.0f64,
        gamma in 0.0..0.1f64,
        seed in any::<u64>(),
    ) {
        let config = SimulationConfig {
            w,
            g,
            gamma,
            seed,
            snapshot_times: vec![10.0, 100.0],
            ..SimulationConfig::default()
        };
        let json_text = serde_json::to_string(&config).unwrap();
        let from_json: SimulationConfig = serde_json::from_str(&json_text).unwrap();
        prop_assert_eq!(&from_json, &config);
        // TOML integers are i64, so manifest seeds live in [0, 2^63).
        let config = SimulationConfig { seed: seed & (i64::MAX as u64), ..config };
        let toml_text = toml::to_string(&config).unwrap();
        let from_toml: SimulationConfig = toml::from_str(&toml_text).unwrap();
        prop_assert_eq!(&from_toml, &config);
    }
}

proptest! {
    // Full trajectories are costlier; fewer cases.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn survival_stays_physical(
        w in 0.0..8.0f64,
        g in 0.0..10.0f64,
        gamma in 0.0..0.3f64,
        seed in any::<u64>(),
    ) {
        let config = SimulationConfig {
            l: 41,
            l0: 3,
            w,
            g,
            gamma,
            t_max: 5.0,
            seed,
            // Tight budget so the physical-range assertions below are not
            // confounded by permitted integrator drift.
            norm_drift_budget: 1e-9,
            ..SimulationConfig::default()
        };
        let mut disorder_rng = stream(seed, 0, StreamKind::Disorder);
        let disorder = sample_disorder(w, 41, &mut disorder_rng).unwrap();
        let mut phase_rng = stream(seed, 0, StreamKind::Phases);
        let state0 = initial_state(3, 41, &mut phase_rng).unwrap();
        let mut emission_rng = stream(seed, 0, StreamKind::Emission);
        let schedule = sample_se_schedule(gamma, 5.0, &mut emission_rng).unwrap();
        let record = evolve(&config, &disorder, &state0, &schedule, &Observers::standard(&config)).unwrap();
        for &p in &record.survival {
            prop_assert!((0.0..=1.0 + 5e-9).contains(&p));
        }
        prop_assert!(*record.survival.last().unwrap() <= record.survival[0] + 5e-9);
    }

    #[test]
    fn global_phase_never_matters(
        seed in any::<u64>(),
        phase in 0.0..std::f64::consts::TAU,
    ) {
        let config = SimulationConfig { l: 41, l0: 3, t_max: 3.0, ..SimulationConfig::default() };
        let mut disorder_rng = stream(seed, 0, StreamKind::Disorder);
        let disorder = sample_disorder(config.w, 41, &mut disorder_rng).unwrap();
        let mut phase_rng = stream(seed, 0, StreamKind::Phases);
        let state0 = initial_state(3, 41, &mut phase_rng).unwrap();
        let rotated = LatticeState {
            c: state0.c.iter().map(|c| c * Complex64::from_polar(1.0, phase)).collect(),
            t: state0.t,
        };
        let obs = Observers::standard(&config);
        let schedule = sample_se_schedule(0.0, 3.0, &mut stream(seed, 0, StreamKind::Emission)).unwrap();
        let a = evolve(&config, &disorder, &state0, &schedule, &obs).unwrap();
        let b = evolve(&config, &disorder, &rotated, &schedule, &obs).unwrap();
        for (x, y) in a.survival.iter().zip(&b.survival) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in a.second_moment.iter().zip(&b.second_moment) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
