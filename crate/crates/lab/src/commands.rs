//! One function per subcommand. Each resolves its configuration, runs the
//! simulation and writes its artifacts under `--out`.

use std::f64::consts::TAU as TWO_PI;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use sagqg_core::analysis::{extract_geometric_phase, solid_angle, stroboscopic_readout};
use sagqg_core::benchmarking::{run_rb, DriveParams, FitModel, GateSet, RbConfig, DEFAULT_LENGTHS};
use sagqg_core::dynamics::DEFAULT_SUBSTEPS;
use sagqg_core::experiments::{
    default_sweep_states, default_tau_values, fidelity_vs_tau, gamma_sweep, parameter_set, pi_pulse_time, tau_min,
    tau_min_map, trajectory_experiment, SweepGrid,
};
use sagqg_core::rng::{stream, Domain};
use sagqg_core::schedule::{build_schedule, default_tau, DEFAULT_DELTA_0, DEFAULT_OMEGA_0, DEFAULT_OMEGA_MAX};
use sagqg_core::tomography::{
    corrected_fidelity, ideal_chi, process_fidelity, reconstruct_chi, simulate_qpt, ProcessMatrix, ProcessUnderTest,
    QptConfig, BASIS_LABELS,
};
use sagqg_core::{GateSpec, PulseSchedule, Unitary2};

use crate::cli::{
    Command, FidelityVsTauArgs, FitModelName, GammaSweepArgs, GateArgs, GateName, GateSetName, ParameterSetName,
    QptArgs, RbArgs, RunArgs, ScheduleArgs, TauMinMapArgs, TrajectoryArgs,
};
use crate::config::{layer, noise_json, parse_noise, parse_range, parse_values, resolve_seed};
use crate::error::LabError;
use crate::format::{json_num, json_nums, write_csv, write_json, Metadata};

type Outcome = Result<Vec<PathBuf>, LabError>;

pub fn execute(command: Command) -> Outcome {
    let name = command.name();
    match command {
        Command::Schedule(a) => schedule(layer(name, &a, a.run.config.as_deref())?),
        Command::Trajectory(a) => trajectory(layer(name, &a, a.run.config.as_deref())?),
        Command::Qpt(a) => qpt(layer(name, &a, a.run.config.as_deref())?),
        Command::Rb(a) => rb(layer(name, &a, a.run.config.as_deref())?),
        Command::GammaSweep(a) => gamma_sweep_cmd(layer(name, &a, a.run.config.as_deref())?),
        Command::TauMinMap(a) => tau_min_map_cmd(layer(name, &a, a.run.config.as_deref())?),
        Command::FidelityVsTau(a) => fidelity_vs_tau_cmd(layer(name, &a, a.run.config.as_deref())?),
    }
}

fn out_dir(run: &RunArgs) -> Result<PathBuf, LabError> {
    run.out.clone().ok_or_else(|| LabError::usage("--out <DIR> is required"))
}

fn positive(name: &str, value: f64) -> Result<f64, LabError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(LabError::usage(format!("{name} must be positive and finite, got {value}")))
    }
}

fn at_least(name: &str, value: usize, min: usize) -> Result<usize, LabError> {
    if value >= min {
        Ok(value)
    } else {
        Err(LabError::usage(format!("{name} must be at least {min}, got {value}")))
    }
}

/// Gate(s) to play, in order, plus the configuration echo.
struct ResolvedGate {
    name: GateName,
    specs: Vec<GateSpec>,
    echo: Value,
}

impl ResolvedGate {
    fn single(&self) -> Result<&GateSpec, LabError> {
        match self.specs.as_slice() {
            [spec] => Ok(spec),
            _ => Err(LabError::usage(format!("`{}` is a gate sequence; only `qpt` accepts it", self.name.as_str()))),
        }
    }

    fn target(&self) -> Unitary2 {
        match self.name {
            GateName::Hadamard => Unitary2::hadamard(),
            _ => self.specs.iter().fold(Unitary2::IDENTITY, |acc, s| s.ideal_unitary() * acc),
        }
    }
}

/// `sweep` is set when γ comes from elsewhere, so phase and flip gates
/// need no `--gamma` and may not take one.
fn resolve_gate(args: &GateArgs, default: Option<GateName>, sweep: bool) -> Result<ResolvedGate, LabError> {
    let name = args.gate.or(default).ok_or_else(|| LabError::usage("--gate is required"))?;
    if sweep && args.gamma.is_some() {
        return Err(LabError::usage("--gamma conflicts with the swept phase; use --gammas"));
    }
    if args.axis_phase.is_some() && name != GateName::Flip {
        return Err(LabError::usage("--axis-phase applies to the flip gate only"));
    }
    if args.gamma.is_some() && matches!(name, GateName::Identity | GateName::Hadamard) {
        return Err(LabError::usage(format!("--gamma cannot be combined with `{}`", name.as_str())));
    }
    let needs_gamma = || -> Result<f64, LabError> {
        match (args.gamma, sweep) {
            (Some(g), _) => Ok(g),
            (None, true) => Ok(std::f64::consts::FRAC_PI_2),
            (None, false) => Err(LabError::usage(format!("gate `{}` needs --gamma", name.as_str()))),
        }
    };
    let axis_phase = args.axis_phase.unwrap_or(0.0);
    let mut specs = match name {
        GateName::Identity => vec![GateSpec::phase_gate(0.0)],
        GateName::PauliX => vec![GateSpec::pauli_x()],
        GateName::PauliY => vec![GateSpec::pauli_y()],
        GateName::PauliZ => vec![GateSpec::pauli_z()],
        GateName::Hadamard => GateSpec::hadamard_sequence().to_vec(),
        GateName::Phase => vec![GateSpec::phase_gate(needs_gamma()?)],
        GateName::Flip => vec![GateSpec::flip_gate(axis_phase, needs_gamma()?)],
    };
    if let (Some(g), GateName::PauliX | GateName::PauliY | GateName::PauliZ) = (args.gamma, name) {
        specs = specs.into_iter().map(|s| s.with_gamma(g)).collect();
    }
    let omega_0 = args.omega0.unwrap_or(DEFAULT_OMEGA_0);
    let delta_0 = args.delta0.unwrap_or(DEFAULT_DELTA_0);
    let tau = args.tau.unwrap_or_else(|| default_tau(omega_0));
    let specs: Vec<GateSpec> = specs.into_iter().map(|s| s.with_drive(omega_0, delta_0, tau)).collect();
    for s in &specs {
        s.validate()?;
    }
    let gamma = match (sweep, name) {
        (true, _) | (false, GateName::Hadamard) => Value::Null,
        (false, _) => Value::from(args.gamma.unwrap_or_else(|| specs[0].gamma())),
    };
    let echo = json!({
        "gate": name.as_str(),
        "gamma_rad": gamma,
        "axis_phase_rad": if name == GateName::Flip { Value::from(axis_phase) } else { Value::Null },
        "omega0_MHz": omega_0,
        "delta0_MHz": delta_0,
        "tau_us": tau,
    });
    Ok(ResolvedGate { name, specs, echo })
}

fn schedule(a: ScheduleArgs) -> Outcome {
    let out = out_dir(&a.run)?;
    let seed = resolve_seed(a.run.seed)?;
    let gate = resolve_gate(&a.gate, None, false)?;
    let samples = at_least("samples", a.samples.unwrap_or(1001), 2)?;
    let mut schedule = build_schedule(gate.single()?)?;
    if let Some(clip) = a.clip {
        schedule = schedule.with_rabi_clip(positive("clip", clip)?);
    }
    let meta = Metadata::new("schedule", seed, json!({ "gate": gate.echo, "samples": samples, "clip_MHz": a.clip }));
    let rows = schedule.sample_uniform(samples)?.into_iter().map(|s| {
        vec![
            s.t,
            s.rabi,
            s.corrected_rabi,
            s.superadiabatic_rabi,
            s.superadiabatic_detuning,
            s.drive_detuning,
            s.phase,
        ]
    });
    let columns = ["t_us", "omega_R_MHz", "omega_C_MHz", "omega_S_MHz", "delta_S_MHz", "delta_MHz", "phase_rad"];
    Ok(vec![write_csv(&out, "schedule.csv", &meta, &columns, rows)?])
}

fn trajectory(a: TrajectoryArgs) -> Outcome {
    let out = out_dir(&a.run)?;
    let seed = resolve_seed(a.run.seed)?;
    let gate = resolve_gate(&a.gate, None, false)?;
    let spec = *gate.single()?;
    let samples = at_least("samples", a.samples.unwrap_or(401), 2)?;
    let substeps = at_least("substeps", a.substeps.unwrap_or(1024), 1)?;
    let meta = Metadata::new(
        "trajectory",
        seed,
        json!({ "gate": gate.echo, "samples": samples, "substeps": substeps, "initial_state": "|0>" }),
    );

    let result = trajectory_experiment(&spec, samples, substeps)?;
    let times: Vec<f64> = result.direct.iter().map(|b| b.t).collect();
    let mut written = Vec::new();
    let state_rows = times.iter().zip(&result.states).map(|(&t, psi)| {
        let [a0, a1] = psi.0;
        vec![t, a0.re, a0.im, a1.re, a1.im]
    });
    written.push(write_csv(&out, "states.csv", &meta, &["t_us", "re0", "im0", "re1", "im1"], state_rows)?);
    let bloch_rows = result.direct.iter().map(|b| vec![b.t, b.x, b.y, b.z]);
    written.push(write_csv(&out, "bloch.csv", &meta, &["t_us", "x", "y", "z"], bloch_rows)?);
    let readout_rows = stroboscopic_readout(&times, &result.states).into_iter().map(|r| {
        let [x, y, z] = r.reconstruct();
        vec![r.t, r.p0_x, r.p0_y, r.p0_direct, x, y, z]
    });
    let readout_columns = ["t_us", "p0_half_pi_x", "p0_half_pi_y", "p0_direct", "x", "y", "z"];
    written.push(write_csv(&out, "readout.csv", &meta, &readout_columns, readout_rows)?);

    let split = extract_geometric_phase(&spec, substeps)?;
    let cyclic: Vec<Value> = ["lambda_plus", "lambda_minus"]
        .iter()
        .zip(split)
        .map(|(label, d)| {
            json!({
                "state": label,
                "total_rad": json_num(d.total),
                "dynamic_rad": json_num(d.dynamic),
                "geometric_rad": json_num(d.geometric),
            })
        })
        .collect();
    // Only closed paths of |0⟩ enclose a solid angle.
    let area = solid_angle(&result.direct).ok();
    let mut body = Map::new();
    body.insert("gamma_rad".into(), json_num(spec.gamma()));
    body.insert("cyclic_states".into(), Value::Array(cyclic));
    body.insert("solid_angle_sr".into(), area.map_or(Value::Null, json_num));
    written.push(write_json(&out, "phases.json", &meta, body)?);
    Ok(written)
}

fn chi_json(chi: &ProcessMatrix) -> Value {
    Value::Array(chi.chi.iter().map(|row| Value::Array(row.iter().map(|c| json_nums(&[c.re, c.im])).collect())).collect())
}

fn qpt(a: QptArgs) -> Outcome {
    let out = out_dir(&a.run)?;
    let seed = resolve_seed(a.run.seed)?;
    let gate = resolve_gate(&a.gate, None, false)?;
    let noise = parse_noise(a.noise.as_deref().unwrap_or("none"))?;
    let config = QptConfig {
        shots: a.shots.unwrap_or(1000),
        noise_draws: at_least("noise-draws", a.noise_draws.unwrap_or(32), 1)?,
        substeps: at_least("substeps", a.substeps.unwrap_or(1024), 1)?,
    };
    let meta = Metadata::new(
        "qpt",
        seed,
        json!({
            "gate": gate.echo,
            "shots": config.shots,
            "noise": noise_json(&noise),
            "noise_draws": config.noise_draws,
            "substeps": config.substeps,
        }),
    );

    let schedules = gate.specs.iter().map(build_schedule).collect::<Result<Vec<PulseSchedule>, _>>()?;
    let process = match schedules.as_slice() {
        [one] => ProcessUnderTest::Schedule(one),
        many => ProcessUnderTest::Sequence(many),
    };
    let mut rng = stream(seed, Domain::Tomography, 0);
    let records = simulate_qpt(&process, &noise, &config, &mut rng)?;
    let chi = reconstruct_chi(&records)?;
    let chi_0 = ideal_chi(&gate.target())?;
    let fidelity = process_fidelity(&chi, &chi_0);

    let drive = &gate.specs[0];
    let identity = build_schedule(&GateSpec::phase_gate(0.0).with_drive(drive.omega_0, drive.delta_0, drive.tau))?;
    let mut rng = stream(seed, Domain::Tomography, 1);
    let id_records = simulate_qpt(&ProcessUnderTest::Schedule(&identity), &noise, &config, &mut rng)?;
    let identity_fidelity = process_fidelity(&reconstruct_chi(&id_records)?, &ideal_chi(&Unitary2::IDENTITY)?);
    let corrected = corrected_fidelity(fidelity, identity_fidelity)?;

    let mut body = Map::new();
    body.insert("gate".into(), Value::from(gate.name.as_str()));
    body.insert("basis".into(), json!(BASIS_LABELS));
    body.insert("chi_exp".into(), chi_json(&chi));
    body.insert("chi_ideal".into(), chi_json(&chi_0));
    body.insert("fidelity".into(), json_num(fidelity));
    body.insert("identity_fidelity".into(), json_num(identity_fidelity));
    body.insert("corrected_fidelity".into(), json_num(corrected));
    body.insert(
        "records".into(),
        Value::Array(
            records
                .iter()
                .map(|r| json!({ "input": r.input_index, "setting": r.setting.name(), "p0": json_num(r.p0) }))
                .collect(),
        ),
    );
    Ok(vec![write_json(&out, "qpt.json", &meta, body)?])
}

fn rb(a: RbArgs) -> Outcome {
    let out = out_dir(&a.run)?;
    let seed = resolve_seed(a.run.seed)?;
    let gateset = match a.gateset.unwrap_or(GateSetName::Sagqg) {
        GateSetName::Sagqg => GateSet::Sagqg,
        GateSetName::Dynamic => GateSet::Dynamic,
    };
    let fit_model = match a.fit_model.unwrap_or(FitModelName::Survival) {
        FitModelName::Survival => FitModel::Survival,
        FitModelName::Complement => FitModel::Complement,
    };
    let noise = parse_noise(a.noise.as_deref().unwrap_or("none"))?;
    let omega_0 = a.omega0.unwrap_or(DEFAULT_OMEGA_0);
    let config = RbConfig {
        n_sequences: a.sequences.unwrap_or(4),
        n_pauli_randomizations: a.randomizations.unwrap_or(8),
        lengths: a.lengths.clone().unwrap_or_else(|| DEFAULT_LENGTHS.to_vec()),
        shots: a.shots.unwrap_or(1000),
        seed,
        substeps: a.substeps.unwrap_or(DEFAULT_SUBSTEPS),
        drive: DriveParams {
            omega_0,
            delta_0: a.delta0.unwrap_or(DEFAULT_DELTA_0),
            tau: a.tau.unwrap_or_else(|| default_tau(omega_0)),
        },
        dynamic_rabi: a.dynamic_rabi.unwrap_or(DEFAULT_OMEGA_MAX),
        fit_model,
    };
    config.validate()?;
    let fit_name = match fit_model {
        FitModel::Survival => "survival",
        FitModel::Complement => "complement",
    };
    let meta = Metadata::new(
        "rb",
        seed,
        json!({
            "gateset": gateset.name(),
            "noise": noise_json(&noise),
            "sequences": config.n_sequences,
            "randomizations": config.n_pauli_randomizations,
            "lengths": config.lengths,
            "shots": config.shots,
            "substeps": config.substeps,
            "omega0_MHz": config.drive.omega_0,
            "delta0_MHz": config.drive.delta_0,
            "tau_us": config.drive.tau,
            "dynamic_rabi_MHz": config.dynamic_rabi,
            "fit_model": fit_name,
        }),
    );

    let result = run_rb(gateset, &noise, &config)?;
    let fit = result.fit;
    let survival_fit = |l: f64| fit.evaluate(l, FitModel::Survival);
    let rows = result
        .lengths
        .iter()
        .zip(result.mean.iter().zip(&result.sem))
        .map(|(&l, (&m, &s))| vec![l as f64, m, s, survival_fit(l as f64)]);
    let csv = write_csv(&out, "rb.csv", &meta, &["length", "mean", "sem", "fit"], rows)?;

    let mut body = Map::new();
    body.insert("gateset".into(), Value::from(gateset.name()));
    body.insert(
        "fit".into(),
        json!({
            "model": fit_name,
            "epsilon_g": json_num(fit.epsilon_g),
            "sigma_g": json_num(fit.sigma_g()),
            "epsilon_m": json_num(fit.epsilon_m),
            "sigma_m": json_num(fit.sigma_m()),
            "covariance": [json_nums(&fit.covariance[0]), json_nums(&fit.covariance[1])],
            "residual": json_num(fit.residual),
            "iterations": fit.iterations,
        }),
    );
    body.insert("lengths".into(), json!(result.lengths));
    body.insert("mean".into(), json_nums(&result.mean));
    body.insert("sem".into(), json_nums(&result.sem));
    body.insert("survivals".into(), json_nums(&result.survivals));
    let json = write_json(&out, "rb.json", &meta, body)?;
    Ok(vec![csv, json])
}

fn gamma_sweep_cmd(a: GammaSweepArgs) -> Outcome {
    let out = out_dir(&a.run)?;
    let seed = resolve_seed(a.run.seed)?;
    let gate = resolve_gate(&a.gate, Some(GateName::PauliZ), true)?;
    let base = *gate.single()?;
    let gammas = match a.gammas.as_deref() {
        Some(text) => parse_values(text)?,
        None => (1..=64).map(|i| TWO_PI * i as f64 / 65.0).collect(),
    };
    let substeps = at_least("substeps", a.substeps.unwrap_or(512), 1)?;
    let meta = Metadata::new(
        "gamma-sweep",
        seed,
        json!({
            "gate": gate.echo,
            "gammas_rad": gammas,
            "substeps": substeps,
            "initial_states": ["|0>", "(|0>-|1>)/sqrt2"],
            "readout": "(pi/2) about -y",
        }),
    );
    let points = gamma_sweep(&default_sweep_states(), &gammas, &base, substeps)?;
    let rows = points.iter().map(|p| vec![p.gamma, p.state_index as f64, p.p0]);
    Ok(vec![write_csv(&out, "gamma_sweep.csv", &meta, &["gamma_rad", "state_index", "p0"], rows)?])
}

fn tau_min_map_cmd(a: TauMinMapArgs) -> Outcome {
    let out = out_dir(&a.run)?;
    let seed = resolve_seed(a.run.seed)?;
    let (o_lo, o_hi, o_n) = parse_range(a.omega0_range.as_deref().unwrap_or("0.5:3.5:64"))?;
    let (d_lo, d_hi, d_n) = parse_range(a.delta0_range.as_deref().unwrap_or("0.5:8:64"))?;
    let grid = SweepGrid {
        omega_0: (o_lo, o_hi),
        delta_0: (d_lo, d_hi),
        resolution: (o_n, d_n),
        omega_max: a.omega_max.unwrap_or(DEFAULT_OMEGA_MAX),
    };
    grid.validate()?;
    let meta = Metadata::new(
        "tau-min-map",
        seed,
        json!({
            "omega0_range_MHz": [o_lo, o_hi],
            "delta0_range_MHz": [d_lo, d_hi],
            "resolution": [o_n, d_n],
            "omega_max_MHz": grid.omega_max,
        }),
    );
    let map = tau_min_map(&grid)?;
    let rows = map.omega_0.iter().zip(&map.tau).flat_map(|(&o, row)| {
        map.delta_0.iter().zip(row).map(move |(&d, &t)| vec![o, d, t])
    });
    let csv = write_csv(&out, "tau_min_map.csv", &meta, &["omega0_MHz", "delta0_MHz", "tau_min_us"], rows)?;

    let t_pi = pi_pulse_time(grid.omega_max);
    let infeasible = map.tau.iter().flatten().filter(|t| t.is_infinite()).count();
    let mut body = Map::new();
    if let Some((t, o, d)) = map.minimum() {
        body.insert("minimum_tau_us".into(), json_num(t));
        body.insert("minimum_omega0_MHz".into(), json_num(o));
        body.insert("minimum_delta0_MHz".into(), json_num(d));
        body.insert("minimum_gate_time_us".into(), json_num(4.0 * t));
        body.insert("minimum_over_pi_pulse".into(), json_num(t / t_pi));
    }
    body.insert("pi_pulse_time_us".into(), json_num(t_pi));
    body.insert("infeasible_nodes".into(), Value::from(infeasible));
    let json = write_json(&out, "tau_min_summary.json", &meta, body)?;
    Ok(vec![csv, json])
}

fn fidelity_vs_tau_cmd(a: FidelityVsTauArgs) -> Outcome {
    let out = out_dir(&a.run)?;
    let seed = resolve_seed(a.run.seed)?;
    let set_name = match a.set.unwrap_or(ParameterSetName::A) {
        ParameterSetName::A => "A",
        ParameterSetName::B => "B",
        ParameterSetName::C => "C",
    };
    let set = parameter_set(set_name).expect("named sets exist");
    let omega_0 = positive("omega0", a.omega0.unwrap_or(set.omega_0))?;
    let delta_0 = a.delta0.unwrap_or(set.delta_0);
    let omega_max = positive("omega-max", a.omega_max.unwrap_or(DEFAULT_OMEGA_MAX))?;
    let taus = match a.taus.as_deref() {
        Some(text) => parse_values(text)?,
        None => default_tau_values(omega_max, 41),
    };
    if let Some(bad) = taus.iter().find(|&&t| t <= 0.0) {
        return Err(LabError::usage(format!("durations must be positive, got {bad}")));
    }
    let substeps = at_least("substeps", a.substeps.unwrap_or(1024), 1)?;
    let limit = tau_min(omega_0, delta_0, omega_max)?;
    let meta = Metadata::new(
        "fidelity-vs-tau",
        seed,
        json!({
            "gate": "pauli-x",
            "set": set_name,
            "omega0_MHz": omega_0,
            "delta0_MHz": delta_0,
            "omega_max_MHz": omega_max,
            "taus_us": taus,
            "substeps": substeps,
        }),
    )
    .note("clip_model", "hard clip of Omega_S at omega_max, a stand-in for the drive-strength mismatch below tau_min")
    .note("tau_min_us", crate::format::fmt_num(limit))
    .note("pi_pulse_time_us", crate::format::fmt_num(pi_pulse_time(omega_max)));
    let points = fidelity_vs_tau(omega_0, delta_0, &taus, omega_max, substeps)?;
    let rows = points.iter().map(|p| vec![p.tau, p.fidelity]);
    Ok(vec![write_csv(&out, "fidelity_vs_tau.csv", &meta, &["tau_us", "fidelity"], rows)?])
}
