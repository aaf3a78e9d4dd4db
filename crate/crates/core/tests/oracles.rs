//! Cross-route checks on fixed, seeded ensembles: every closed form in the
//! library is compared against an independent computation (explicit rotations,
//! full product-space operators, or direct operator expectation values).

mod common;

use dicke_metrology::{
    bootstrap_gain, collective, expectation, experimental_bound, moments_of, optimal_variance,
    phase_average, qfi, random_pure, squeezed_ground_state, thermal_dicke, variance_at, z_bound,
    Axis, BootstrapConfig, MeasuredMoments, SpinSystem,
};

use common::{
    embed_full, full_space_moments, linspace, propagation_oracle, random_phase_averaged, rel_dev,
};

/// <{Jz,Jx}^2> + <{Jz^2,Jx^2}> computed from explicit operator products.
fn quartic_cross_sum(state: &dicke_metrology::QuantumState<f64>) -> f64 {
    let sys = state.system();
    let jx = collective::<f64>(sys, Axis::X);
    let jz = collective::<f64>(sys, Axis::Z);
    let anticomm_sq = jz.anticommutator(&jx).unwrap().squared();
    let cross = jz.squared().anticommutator(&jx.squared()).unwrap();
    expectation(state, &anticomm_sq).unwrap() + expectation(state, &cross).unwrap()
}

#[test]
fn quartic_cross_identity_holds_on_a_hundred_random_states() {
    let mut checked = 0;
    for seed in 0..100u64 {
        let n = 2 + (seed % 7) as u32; // cycles N through 2..=8
        let sys = SpinSystem::symmetric(n).unwrap();
        let state = random_pure::<f64>(sys, 5000 + seed);
        let m = moments_of(&state);
        let lhs = quartic_cross_sum(&state);
        let rhs = 4.0 * m.jx2 - 3.0 * m.jy2 - 2.0 * m.jz2 + 6.0 * m.jz_jx2_jz;
        assert!(
            (lhs - rhs).abs() <= 1e-9,
            "N={n} seed={seed}: {lhs} vs {rhs}"
        );
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn symmetric_subspace_moments_agree_with_the_full_product_space() {
    for (n, seed) in [(4u32, 11u64), (6, 12), (8, 13)] {
        let sys = SpinSystem::symmetric(n).unwrap();
        for state in [
            random_pure::<f64>(sys, seed),
            random_phase_averaged(n, seed + 100),
            thermal_dicke(n, 1.3).unwrap(),
        ] {
            let compact = moments_of(&state);
            let full = full_space_moments(&state);
            let scale = f64::from(n).powi(4);
            for (what, a, b) in [
                ("jx2", compact.jx2, full.jx2),
                ("jy2", compact.jy2, full.jy2),
                ("jz2", compact.jz2, full.jz2),
                ("jx4", compact.jx4, full.jx4),
                ("jz4", compact.jz4, full.jz4),
                ("jz_jx2_jz", compact.jz_jx2_jz, full.jz_jx2_jz),
            ] {
                assert!(
                    (a - b).abs() / scale <= 1e-9,
                    "N={n} seed={seed} {what}: {a} vs {b}"
                );
            }
            let (ca, fa) = (compact.odd_terms.unwrap(), full.odd_terms.unwrap());
            for (what, a, b) in [
                ("anticomm_zx", ca.anticomm_zx, fa.anticomm_zx),
                ("a_term", ca.a_term, fa.a_term),
                ("b_term", ca.b_term, fa.b_term),
            ] {
                assert!(
                    (a - b).abs() / scale <= 1e-9,
                    "N={n} seed={seed} {what}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn z_reconstruction_never_undershoots_product_space_states() {
    // on phase-averaged product-space states the z-moment reconstruction of
    // <JzJx^2Jz> must sit at or above the true value
    for (n, seed) in [(4u32, 31u64), (5, 35), (6, 32), (7, 36), (8, 33), (8, 34)] {
        let full = SpinSystem::full(n).unwrap();
        let state = phase_average(&random_pure::<f64>(full, seed));
        let m = moments_of(&state);
        let bound = z_bound(m.jz2, m.jz4, n);
        assert!(
            bound >= m.jz_jx2_jz - 1e-9,
            "N={n} seed={seed}: bound {bound} under true {}",
            m.jz_jx2_jz
        );
    }
}

#[test]
fn measured_moment_pipeline_reproduces_the_exact_one_on_ideal_data() {
    // feeding the exact moments of a phase-averaged state through the
    // measured-data path must land on the exact-state optimum
    let mut states = vec![thermal_dicke::<f64>(8, 0.8).unwrap()];
    for (n, seed) in [(5u32, 41u64), (8, 42), (11, 43)] {
        states.push(random_phase_averaged(n, seed));
    }
    for state in &states {
        let m = moments_of(state);
        let measured = MeasuredMoments {
            n_particles: m.n_particles,
            jz2: m.jz2,
            jz2_err: 0.0,
            jz4: m.jz4,
            jz4_err: 0.0,
            jx2: m.jx2,
            jx2_err: 0.0,
            jx4: m.jx4,
            jx4_err: 0.0,
        };
        let from_measured = experimental_bound(&measured).unwrap();
        let exact = optimal_variance(&m).unwrap();
        assert!(
            rel_dev(from_measured.var_opt, exact.var_opt) <= 1e-10,
            "var {} vs {}",
            from_measured.var_opt,
            exact.var_opt
        );
        assert!(
            rel_dev(from_measured.theta_opt, exact.theta_opt) <= 1e-10,
            "theta {} vs {}",
            from_measured.theta_opt,
            exact.theta_opt
        );
    }
}

#[test]
fn bootstrap_mean_is_stable_in_the_resample_count() {
    // The kept-gain distribution is heavy-tailed: a resample whose bound
    // denominator lands just above zero contributes an enormous gain, and the
    // density of that denominator is positive at zero, so single seeds can
    // show drift spikes when one such draw appears in the larger run. The
    // stable statistic is the median drift over a fixed seed panel.
    let measured = MeasuredMoments::<f64>::parse(
        "N = 7900\njz2 = 112\njz2_err = 31\njz4 = 4.0e4\njz4_err = 2.2e4\n\
         jx2 = 6.0e6\njx2_err = 6.0e5\njx4 = 6.2e13\njx4_err = 8.0e12\n",
    )
    .unwrap();
    let mut drifts: Vec<f64> = (1..=9u64)
        .map(|seed| {
            let at = |resamples| {
                bootstrap_gain(
                    &measured,
                    &BootstrapConfig {
                        resamples,
                        seed,
                        ..BootstrapConfig::default()
                    },
                )
                .unwrap()
                .mean_gain
            };
            (at(100_000) - at(10_000)).abs()
        })
        .collect();
    drifts.sort_by(f64::total_cmp);
    let median = drifts[drifts.len() / 2];
    assert!(median < 0.05, "median drift {median} over panel {drifts:?}");
}

#[test]
fn closed_form_variance_tracks_the_oracle_on_richer_states() {
    // states outside the acceptance ensemble: a strongly squeezed middle-size
    // probe and a warm mid-size thermal probe
    let squeezed = squeezed_ground_state::<f64>(40, 0.5).unwrap();
    let thermal = thermal_dicke::<f64>(12, 1.0).unwrap();
    for state in [&squeezed, &thermal] {
        let m = moments_of(state);
        for theta in linspace(5e-3, 1.5, 9) {
            let closed = variance_at(&m, theta).unwrap();
            let oracle = propagation_oracle(state, theta, 1e-5);
            assert!(
                rel_dev(closed, oracle) <= 1e-6,
                "theta {theta}: closed {closed} vs oracle {oracle}"
            );
        }
    }
}

#[test]
fn optimal_angle_is_a_global_minimum_on_sampled_grids() {
    for (n, seed) in [(5u32, 51u64), (9, 52), (14, 53)] {
        let state = random_phase_averaged(n, seed);
        let m = moments_of(&state);
        let best = optimal_variance(&m).unwrap();
        // flanking points one percent off the optimum must not be better
        for factor in [0.99, 1.01] {
            let nearby = variance_at(&m, best.theta_opt * factor).unwrap();
            assert!(
                nearby >= best.var_opt * (1.0 - 1e-12),
                "N={n}: {nearby} beats optimum {}",
                best.var_opt
            );
        }
        for theta in linspace(1e-4, std::f64::consts::FRAC_PI_2 - 1e-4, 300) {
            let v = variance_at(&m, theta).unwrap();
            assert!(
                v >= best.var_opt * (1.0 - 1e-12),
                "N={n} theta {theta}: {v} beats optimum {}",
                best.var_opt
            );
        }
    }
}

#[test]
fn sensitivity_never_exceeds_the_fisher_information() {
    let mut cases: Vec<dicke_metrology::QuantumState<f64>> = Vec::new();
    for lambda in [0.1, 1.0, 10.0] {
        cases.push(squeezed_ground_state(30, lambda).unwrap());
    }
    for temperature in [0.1, 1.0, 10.0] {
        cases.push(thermal_dicke(20, temperature).unwrap());
    }
    for seed in [61u64, 62, 63] {
        cases.push(random_phase_averaged(10, seed));
    }
    for state in &cases {
        let generator = collective::<f64>(state.system(), Axis::Y);
        let fisher = qfi(state, &generator).unwrap();
        let result = optimal_variance(&moments_of(state)).unwrap();
        assert!(
            result.inv_var_opt <= fisher * (1.0 + 1e-6),
            "inv_var {} above qfi {fisher}",
            result.inv_var_opt
        );
    }
}

#[test]
fn rotations_commute_with_the_embedding() {
    // rotating then embedding equals embedding then rotating, checked through
    // the measured second moment
    use dicke_metrology::rotate;
    let sys = SpinSystem::symmetric(5).unwrap();
    let state = random_pure::<f64>(sys, 71);
    let theta = 0.37;
    let jz2_sym = collective::<f64>(sys, Axis::Z).squared();
    let rotated_sym = rotate(&state, Axis::Y, -theta).unwrap();
    let a = expectation(&rotated_sym, &jz2_sym).unwrap();

    let embedded = embed_full(&state);
    let full = embedded.system();
    let jz2_full = collective::<f64>(full, Axis::Z).squared();
    let rotated_full = rotate(&embedded, Axis::Y, -theta).unwrap();
    let b = expectation(&rotated_full, &jz2_full).unwrap();
    assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
}

