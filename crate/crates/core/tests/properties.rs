//! Randomized invariants of the waveform, the integrator, tomography and
//! the decay fit.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use sagqg_core::analysis::bloch_trajectory;
use sagqg_core::benchmarking::{decay_model, fit_rb_decay, FitModel, NoiseModel};
use sagqg_core::dynamics::{evolve_state, propagate, propagate_between, propagate_schedule, RotatingFrame};
use sagqg_core::schedule::{
    build_schedule, drive_detuning, max_superadiabatic_rabi, rabi_envelope, superadiabatic_detuning,
    superadiabatic_phase, superadiabatic_rabi,
};
use sagqg_core::tomography::{
    cp_project, ideal_chi, process_fidelity, reconstruct_chi, simulate_qpt, ProcessMatrix, ProcessUnderTest, QptConfig,
};
use sagqg_core::rng::{stream, Domain};
use sagqg_core::{GateFamily, GateSpec, QubitState, Unitary2};

fn family() -> impl Strategy<Value = GateFamily> {
    prop_oneof![Just(GateFamily::Phase), Just(GateFamily::Flip)]
}

/// Valid specs with a strictly positive detuning amplitude.
fn spec() -> impl Strategy<Value = GateSpec> {
    (family(), 0.01..6.27f64, 0.0..TAU, 0.2..3.5f64, 0.1..8.0f64, 0.05..0.5f64).prop_map(
        |(family, gamma, axis, omega_0, delta_0, tau)| {
            let base = match family {
                GateFamily::Phase => GateSpec::phase_gate(gamma),
                GateFamily::Flip => GateSpec::flip_gate(axis, gamma),
            };
            base.with_drive(omega_0, delta_0, tau)
        },
    )
}

fn random_unitary() -> impl Strategy<Value = Unitary2> {
    (0.0..PI, 0.0..TAU, 0.0..TAU, 0.0..TAU).prop_map(|(theta, phi, angle, global)| {
        let axis = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        Unitary2::rotation(axis, angle).scale(Complex64::from_polar(1.0, global))
    })
}

fn exact_records(u: Unitary2) -> Vec<sagqg_core::tomography::MeasurementRecord> {
    let mut rng = stream(0, Domain::Tomography, 0);
    simulate_qpt(&ProcessUnderTest::Unitary(u), &NoiseModel::none(), &QptConfig::default(), &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn propagators_are_unitary(spec in spec(), substeps in 1usize..400) {
        let u = propagate_schedule(&build_schedule(&spec).unwrap(), substeps).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
    }

    #[test]
    fn propagation_composes(spec in spec(), split in 0.05..0.95f64) {
        let schedule = build_schedule(&spec).unwrap();
        let end = schedule.total_time();
        let step = end / 8192.0;
        let t1 = split * end;
        let whole = propagate_between(&schedule, 0.0, end, step).unwrap();
        let parts = propagate_between(&schedule, t1, end, step).unwrap()
            * propagate_between(&schedule, 0.0, t1, step).unwrap();
        prop_assert!(whole.frobenius_distance(&parts) < 1e-8, "{}", whole.frobenius_distance(&parts));
    }

    #[test]
    fn uniform_steps_compose_exactly(spec in spec(), n in 1usize..200) {
        let schedule = build_schedule(&spec).unwrap();
        let src = RotatingFrame(&schedule);
        let (t0, t2) = (0.1 * spec.tau, 0.9 * spec.tau);
        let t1 = 0.5 * (t0 + t2);
        let whole = propagate(&src, t0, t2, 2 * n).unwrap();
        let parts = propagate(&src, t1, t2, n).unwrap() * propagate(&src, t0, t1, n).unwrap();
        prop_assert!(whole.frobenius_distance(&parts) < 1e-12);
    }

    #[test]
    fn trajectories_stay_normalized(spec in spec()) {
        let schedule = build_schedule(&spec).unwrap();
        let times: Vec<f64> = (0..=64).map(|i| schedule.total_time() * i as f64 / 64.0).collect();
        for psi in evolve_state(&QubitState::ZERO, &schedule, &times, 128).unwrap() {
            prop_assert!((psi.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_and_detuning_never_vanish_together(spec in spec()) {
        let n = 4096;
        for i in 0..=n {
            let t = 4.0 * spec.tau * i as f64 / n as f64;
            let r = rabi_envelope(t, &spec).unwrap();
            let d = superadiabatic_detuning(t, &spec).unwrap();
            prop_assert!(r * r + d * d > 1e-12);
        }
    }

    #[test]
    fn envelope_is_continuous_at_boundaries(spec in spec()) {
        for k in 1..4 {
            let t = k as f64 * spec.tau;
            let left = rabi_envelope(t * (1.0 - 1e-13), &spec).unwrap();
            let right = rabi_envelope(t, &spec).unwrap();
            prop_assert!((left - right).abs() < 1e-9);
        }
    }

    #[test]
    fn drive_detuning_solves_its_ode(spec in spec()) {
        // Δ + Δ̇t = Δ_S with Δ̇ by central difference at h = 1e-6 τ.
        let h = 1e-6 * spec.tau;
        let end = 4.0 * spec.tau;
        let tol = 1e-9 * spec.delta_0.max(1.0);
        let n = 2000;
        for i in 0..=n {
            let t = 1e-3 * spec.tau + (end - 1e-3 * spec.tau) * i as f64 / n as f64;
            let near_jump = (1..=4).any(|k| (t - k as f64 * spec.tau).abs() <= 2.0 * h);
            if near_jump {
                continue;
            }
            let d = drive_detuning(t, &spec).unwrap();
            let (tp, tm) = (t + h, t - h);
            let rate = (drive_detuning(tp, &spec).unwrap() - drive_detuning(tm, &spec).unwrap()) / (tp - tm);
            let residual = (d + rate * t - superadiabatic_detuning(t, &spec).unwrap()).abs();
            prop_assert!(residual < tol, "t = {t}: residual {residual:e}");
        }
    }

    #[test]
    fn drive_scales_with_time(spec in spec(), c in 0.25..4.0f64) {
        let scaled = spec.with_drive(c * spec.omega_0, c * spec.delta_0, spec.tau / c);
        for i in 0..200 {
            let t = 4.0 * spec.tau * (i as f64 + 0.5) / 200.0;
            let a = superadiabatic_rabi(t, &spec).unwrap();
            let b = superadiabatic_rabi(t / c, &scaled).unwrap();
            prop_assert!((b - c * a).abs() < 1e-9 * (1.0 + c * a));
            let pa = superadiabatic_phase(t, &spec).unwrap();
            let pb = superadiabatic_phase(t / c, &scaled).unwrap();
            prop_assert!((pa - pb).abs() < 1e-9, "t = {t}: {pa} vs {pb}");
        }
    }

    #[test]
    fn peak_rabi_decreases_with_duration(spec in spec()) {
        let taus = [0.05, 0.08, 0.12, 0.2, 0.4, 1.0];
        let peaks: Vec<f64> = taus.iter()
            .map(|&t| max_superadiabatic_rabi(spec.family, spec.omega_0, spec.delta_0, t, 512).unwrap())
            .collect();
        prop_assert!(peaks.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn trajectory_is_gauge_invariant(spec in spec(), phase in 0.0..TAU) {
        let schedule = build_schedule(&spec).unwrap();
        let times: Vec<f64> = (0..=16).map(|i| schedule.total_time() * i as f64 / 16.0).collect();
        let a = evolve_state(&QubitState::ZERO, &schedule, &times, 64).unwrap();
        let b = evolve_state(&QubitState::ZERO.with_global_phase(phase), &schedule, &times, 64).unwrap();
        let ta = bloch_trajectory(&times, &a).unwrap();
        let tb = bloch_trajectory(&times, &b).unwrap();
        for (x, y) in ta.iter().zip(&tb) {
            prop_assert!((x.x - y.x).abs() < 1e-12 && (x.y - y.y).abs() < 1e-12 && (x.z - y.z).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn linear_inversion_round_trip(u in random_unitary()) {
        let chi = reconstruct_chi(&exact_records(u)).unwrap();
        let want = ideal_chi(&u).unwrap();
        prop_assert!(chi.distance(&want) < 1e-8);
        prop_assert!(chi.hermiticity_defect() < 1e-8);
        prop_assert!(chi.trace_preservation_defect() < 1e-8);
    }

    #[test]
    fn fidelity_ignores_global_phase(u in random_unitary(), v in random_unitary(), phase in 0.0..TAU) {
        let a = ideal_chi(&u).unwrap();
        let b = ideal_chi(&v).unwrap();
        let b_shifted = ideal_chi(&v.scale(Complex64::from_polar(1.0, phase))).unwrap();
        prop_assert!((process_fidelity(&a, &b) - process_fidelity(&a, &b_shifted)).abs() < 1e-12);
        let f = process_fidelity(&a, &b);
        prop_assert!((f - u.average_gate_fidelity(&v) * 1.5 + 0.5).abs() < 1e-9);
    }

    #[test]
    fn cp_projection_is_idempotent(u in random_unitary(), v in random_unitary(), w in 0.0..1.0f64) {
        // A convex mixture of two unitary channels is already CP.
        let a = ideal_chi(&u).unwrap();
        let b = ideal_chi(&v).unwrap();
        let mut mixed = a;
        for r in 0..4 {
            for c in 0..4 {
                mixed.chi[r][c] = a.chi[r][c] * w + b.chi[r][c] * (1.0 - w);
            }
        }
        let once = cp_project(&mixed);
        let twice = cp_project(&once);
        prop_assert!(once.distance(&twice) < 1e-10);
        prop_assert!(once.eigenvalues()[0] >= -1e-8);
        let target = ideal_chi(&u).unwrap();
        prop_assert!(process_fidelity(&once, &target) <= process_fidelity(&mixed, &target) + 1e-9);
    }

    #[test]
    fn fit_reproduces_its_own_forward_model(eg in 0.0..0.05f64, em in -0.05..0.1f64) {
        let xs: Vec<f64> = [2.0, 4.0, 6.0, 8.0, 10.0, 14.0, 18.0, 22.0, 26.0, 30.0, 34.0, 40.0, 48.0].to_vec();
        let ys: Vec<f64> = xs.iter().map(|&l| decay_model(l, eg, em, FitModel::Survival)).collect();
        let fit = fit_rb_decay(&xs, &ys, FitModel::Survival).unwrap();
        prop_assert!((fit.epsilon_g - eg).abs() < 1e-8, "{} vs {}", fit.epsilon_g, eg);
        prop_assert!((fit.epsilon_m - em).abs() < 1e-8);
    }
}

#[test]
fn cp_projection_repairs_noisy_estimates() {
    let mut rng = stream(3, Domain::Tomography, 0);
    let config = QptConfig { shots: 200, ..QptConfig::default() };
    let records =
        simulate_qpt(&ProcessUnderTest::Unitary(Unitary2::hadamard()), &NoiseModel::none(), &config, &mut rng).unwrap();
    let raw: ProcessMatrix = reconstruct_chi(&records).unwrap();
    let fixed = cp_project(&raw);
    assert!(fixed.eigenvalues()[0] >= -1e-8);
    assert!((fixed.trace() - 1.0).abs() < 1e-10);
}
