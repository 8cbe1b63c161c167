use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use sagqg_core::analysis::{bloch_trajectory, extract_geometric_phase, segment_grid, solid_angle};
use sagqg_core::benchmarking::{detuning_sigma_from_t2_star, run_rb, GateSet, NoiseModel, RbConfig};
use sagqg_core::dynamics::{
    evolve_state, propagate, propagate_schedule, to_rotating_frame, LabFrame, RotatingFrame,
};
use sagqg_core::experiments::{gamma_sweep, trajectory_experiment};
use sagqg_core::rng::{stream, Domain};
use sagqg_core::schedule::{build_schedule, default_tau, max_superadiabatic_rabi, GateFamily};
use sagqg_core::tomography::{
    ideal_chi, process_fidelity, reconstruct_chi, simulate_qpt, ProcessUnderTest, QptConfig,
};
use sagqg_core::{GateSpec, QubitState, Unitary2, TWO_PI};

fn noiseless_fidelity(process: ProcessUnderTest<'_>, target: &Unitary2) -> f64 {
    let mut rng = stream(0, Domain::Tomography, 0);
    let config = QptConfig { substeps: 1024, ..QptConfig::default() };
    let records = simulate_qpt(&process, &NoiseModel::none(), &config, &mut rng).unwrap();
    process_fidelity(&reconstruct_chi(&records).unwrap(), &ideal_chi(target).unwrap())
}

#[test]
fn default_drive_peaks_at_seven_megahertz() {
    let peak = max_superadiabatic_rabi(GateFamily::Phase, 3.5, 1.0, default_tau(3.5), 4096).unwrap();
    assert!((7.0..=7.6).contains(&peak), "{peak}");
}

#[test]
fn integrator_converges_at_second_order() {
    let schedule = build_schedule(&GateSpec::pauli_x()).unwrap();
    let u = |n| propagate_schedule(&schedule, n).unwrap();
    let (a, b, c) = (u(32), u(64), u(128));
    let ratio = a.frobenius_distance(&b) / b.frobenius_distance(&c);
    assert!(ratio >= 4.0 * 0.95, "{ratio}");
}

#[test]
fn phase_gates_are_purely_geometric() {
    for gamma in [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI] {
        let spec = GateSpec::phase_gate(gamma);
        let [up, down] = extract_geometric_phase(&spec, 1024).unwrap();
        for d in [up, down] {
            assert!(d.dynamic.abs() < 1e-2, "{gamma}: {d:?}");
        }
        let schedule = build_schedule(&spec).unwrap();
        let times = segment_grid(&schedule, 2048);
        let states = evolve_state(&QubitState::ZERO, &schedule, &times, 1024).unwrap();
        let area = solid_angle(&bloch_trajectory(&times, &states).unwrap()).unwrap();
        assert!((area.abs() / 2.0 - up.geometric.abs()).abs() < 2e-2, "{gamma}: {area} {up:?}");
    }
}

#[test]
fn flip_gates_cancel_dynamic_phase() {
    for spec in [GateSpec::pauli_x(), GateSpec::pauli_y(), GateSpec::flip_gate(0.3, 1.1)] {
        for d in extract_geometric_phase(&spec, 1024).unwrap() {
            assert!(d.dynamic.abs() < 1e-2, "{spec:?}: {d:?}");
            assert!((d.geometric.abs() - spec.gamma().abs()).abs() < 1e-2);
        }
    }
}

#[test]
fn lab_and_rotating_frames_agree() {
    let schedule = build_schedule(&GateSpec::pauli_x()).unwrap();
    let carrier = 200.0 * TWO_PI * 7.0;
    let end = schedule.total_time();
    let lab = LabFrame { schedule: &schedule, carrier };
    let steps = (end * carrier / TWO_PI * 64.0) as usize;
    let psi_lab = propagate(&lab, 0.0, end, steps).unwrap().apply(&QubitState::ZERO);
    let psi_rot = propagate(&RotatingFrame(&schedule), 0.0, end, 4096).unwrap().apply(&QubitState::ZERO);
    let unwound = to_rotating_frame(&psi_lab, end, carrier, &schedule).unwrap();
    let f = unwound.fidelity(&psi_rot);
    assert!(f > 1.0 - 1e-3, "{f}");
}

#[test]
fn noiseless_gates_pass_tomography() {
    for (spec, target) in [
        (GateSpec::pauli_x(), Unitary2::pauli_x()),
        (GateSpec::pauli_y(), Unitary2::pauli_y()),
        (GateSpec::pauli_z(), Unitary2::pauli_z()),
    ] {
        let schedule = build_schedule(&spec).unwrap();
        let f = noiseless_fidelity(ProcessUnderTest::Schedule(&schedule), &target);
        assert!(f > 0.999, "{spec:?}: {f}");
    }
    let [a, b] = GateSpec::hadamard_sequence().map(|s| build_schedule(&s).unwrap());
    let seq = [a, b];
    let f = noiseless_fidelity(ProcessUnderTest::Sequence(&seq), &Unitary2::hadamard());
    assert!(f > 0.999, "{f}");
}

#[test]
fn shot_noise_error_scales_as_inverse_root() {
    let target = ideal_chi(&Unitary2::hadamard()).unwrap();
    let shots = [100u64, 1_000, 10_000, 100_000];
    let mut points = Vec::new();
    for &n in &shots {
        let mut total = 0.0;
        let reps = 40;
        for r in 0..reps {
            let mut rng = stream(11, Domain::Tomography, r * 10 + n);
            let config = QptConfig { shots: n, ..QptConfig::default() };
            let records =
                simulate_qpt(&ProcessUnderTest::Unitary(Unitary2::hadamard()), &NoiseModel::none(), &config, &mut rng)
                    .unwrap();
            total += reconstruct_chi(&records).unwrap().distance(&target);
        }
        points.push(((n as f64).ln(), (total / reps as f64).ln()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.15, "{slope}");
}

#[test]
fn sweep_and_trajectory_agree_at_quarter_turn() {
    let spec = GateSpec::pauli_z();
    let sweep = gamma_sweep(&[QubitState::ZERO], &[FRAC_PI_2], &spec, 4096).unwrap();
    let traj = trajectory_experiment(&spec, 2, 4096).unwrap();
    let last = traj.states.last().unwrap();
    let readout = sagqg_core::dynamics::ideal_rotation(sagqg_core::dynamics::Axis::YBar, FRAC_PI_2);
    assert!((readout.apply(last).p0() - sweep[0].p0).abs() < 1e-6);
}

#[test]
fn rb_error_grows_with_detuning_spread() {
    let config = RbConfig { n_sequences: 2, n_pauli_randomizations: 4, shots: 0, ..RbConfig::default() };
    let sigmas = [0.0, 0.5, 1.0, 2.0, 4.0].map(|k| k * detuning_sigma_from_t2_star(4.25));
    let fits: Vec<_> =
        sigmas.iter().map(|&s| run_rb(GateSet::Sagqg, &NoiseModel::detuning(s), &config).unwrap().fit).collect();
    for w in fits.windows(2) {
        let slack = 1.96 * (w[0].sigma_g().powi(2) + w[1].sigma_g().powi(2)).sqrt();
        assert!(w[1].epsilon_g >= w[0].epsilon_g - slack, "{fits:?}");
    }
}
