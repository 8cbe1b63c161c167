//! Randomized benchmarking of the superadiabatic and the dynamic gate sets.
//!
//! A base sequence of random π/2 generators is dressed with random Pauli
//! frames and closed by a final pulse that maps the ideal output onto a σ_z
//! eigenstate:
//!
//! ```text
//! S = P_{l+2} R P_{l+1} G_l P_l … G_1 P_1
//! ```
//!
//! Each sequence is simulated at pulse level under one quasi-static noise
//! draw. The average survival decays as `F(l) = (1 + (1 − 2ε_m)(1 − 2ε_g)^l)/2`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::dynamics::{dynamic_pulse, ideal_rotation, propagate_schedule, Axis, DEFAULT_SUBSTEPS};
use crate::linalg::invert4;
use crate::qubit::{QubitState, Unitary2};
use crate::rng::{stream, Domain};
use crate::schedule::{
    build_schedule, default_tau, Distortion, GateSpec, PulseSchedule, DEFAULT_DELTA_0, DEFAULT_OMEGA_0,
    DEFAULT_OMEGA_MAX,
};
use crate::{Error, Result, TWO_PI};

/// Default sequence lengths.
pub const DEFAULT_LENGTHS: [usize; 13] = [2, 4, 6, 8, 10, 14, 18, 22, 26, 30, 34, 40, 48];

/// Measured spin-dephasing time of the reference device (µs).
pub const REFERENCE_T2_STAR: f64 = 4.25;

/// Quasi-static detuning spread for Gaussian dephasing with time constant
/// `t2_star`: `σ = √2 / (2π T₂*)` (MHz).
pub fn detuning_sigma_from_t2_star(t2_star: f64) -> f64 {
    core::f64::consts::SQRT_2 / (TWO_PI * t2_star)
}

/// Quasi-static error channels. Every sigma is a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Detuning offset (MHz).
    pub detuning_sigma: f64,
    /// Relative Rabi amplitude error.
    pub amplitude_error_sigma: f64,
    /// Relative timing error.
    pub timing_error_sigma: f64,
    /// Hard cap on Ω_S (MHz).
    pub rabi_clip: Option<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::none()
    }
}

impl NoiseModel {
    pub const fn none() -> Self {
        NoiseModel { detuning_sigma: 0.0, amplitude_error_sigma: 0.0, timing_error_sigma: 0.0, rabi_clip: None }
    }

    pub const fn detuning(sigma: f64) -> Self {
        NoiseModel { detuning_sigma: sigma, ..NoiseModel::none() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |s: f64| s >= 0.0 && s.is_finite();
        if !(ok(self.detuning_sigma) && ok(self.amplitude_error_sigma) && ok(self.timing_error_sigma)) {
            return Err(Error::InvalidArgument("noise sigmas must be finite and >= 0".into()));
        }
        if let Some(c) = self.rabi_clip {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument("rabi clip must be positive".into()));
            }
        }
        Ok(())
    }

    /// True when every draw would be the same distortion.
    pub fn is_deterministic(&self) -> bool {
        self.detuning_sigma == 0.0 && self.amplitude_error_sigma == 0.0 && self.timing_error_sigma == 0.0
    }

    pub fn is_noiseless(&self) -> bool {
        self.is_deterministic() && self.rabi_clip.is_none()
    }

    /// The distortion with all random channels at zero.
    pub fn nominal(&self) -> Distortion {
        Distortion { rabi_clip: self.rabi_clip, ..Distortion::default() }
    }

    /// Draws one realization. Three standard normals are always consumed,
    /// in the order δ, ε, η, so that streams stay aligned across models.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Distortion {
        let z: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        self.realize(z)
    }

    /// Realization for given standard-normal variates `(z_δ, z_ε, z_η)`.
    pub fn realize(&self, z: [f64; 3]) -> Distortion {
        Distortion {
            detuning_offset: self.detuning_sigma * z[0],
            amplitude_scale: 1.0 + self.amplitude_error_sigma * z[1],
            time_stretch: (1.0 + self.timing_error_sigma * z[2]).max(1e-6),
            rabi_clip: self.rabi_clip,
        }
    }
}

/// Applies one noise draw to a schedule.
pub fn sample_noise<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R, schedule: &PulseSchedule) -> Result<PulseSchedule> {
    model.validate()?;
    Ok(schedule.with_distortion(model.sample(rng)))
}

/// Which hardware realization plays the gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateSet {
    /// Superadiabatic geometric gates.
    Sagqg,
    /// Rectangular resonant pulses with virtual z rotations.
    Dynamic,
}

impl GateSet {
    pub fn name(self) -> &'static str {
        match self {
            GateSet::Sagqg => "sagqg",
            GateSet::Dynamic => "dynamic",
        }
    }

    /// The four π/2 generators of the computational gates.
    pub fn generators(self) -> [GateOp; 4] {
        match self {
            GateSet::Sagqg => [
                GateOp::HalfPi(Axis::X),
                GateOp::HalfPi(Axis::Z),
                GateOp::HalfPi(Axis::XBar),
                GateOp::HalfPi(Axis::ZBar),
            ],
            GateSet::Dynamic => [
                GateOp::HalfPi(Axis::X),
                GateOp::HalfPi(Axis::Y),
                GateOp::HalfPi(Axis::XBar),
                GateOp::HalfPi(Axis::YBar),
            ],
        }
    }
}

/// One gate of a benchmarking sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateOp {
    /// Identity. The dynamic gate set plays it as a 2π rotation about the
    /// given axis (x or x̄); the geometric set uses a γ = 0 phase gate.
    Identity(Axis),
    HalfPi(Axis),
    Pi(Axis),
}

impl GateOp {
    /// The Pauli frame: π rotations about x, z, y, x̄, ȳ, z̄ and the identity.
    pub const PAULI_FRAME: [GateOp; 7] = [
        GateOp::Pi(Axis::X),
        GateOp::Pi(Axis::Z),
        GateOp::Pi(Axis::Y),
        GateOp::Pi(Axis::XBar),
        GateOp::Pi(Axis::YBar),
        GateOp::Pi(Axis::ZBar),
        GateOp::Identity(Axis::X),
    ];

    /// Candidates for the final projective pulse.
    pub const FINAL_CANDIDATES: [GateOp; 5] = [
        GateOp::Identity(Axis::X),
        GateOp::HalfPi(Axis::X),
        GateOp::HalfPi(Axis::XBar),
        GateOp::HalfPi(Axis::Y),
        GateOp::HalfPi(Axis::YBar),
    ];

    pub fn angle(self) -> f64 {
        match self {
            GateOp::Identity(_) => 0.0,
            GateOp::HalfPi(_) => FRAC_PI_2,
            GateOp::Pi(_) => PI,
        }
    }

    pub fn ideal(self) -> Unitary2 {
        match self {
            GateOp::Identity(_) => Unitary2::IDENTITY,
            GateOp::HalfPi(a) | GateOp::Pi(a) => ideal_rotation(a, self.angle()),
        }
    }

    pub fn label(self) -> alloc::string::String {
        match self {
            GateOp::Identity(a) => alloc::format!("id_{}", a.name()),
            GateOp::HalfPi(a) => alloc::format!("{}/2", a.name()),
            GateOp::Pi(a) => a.name().into(),
        }
    }
}

/// Drive parameters shared by all geometric gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub omega_0: f64,
    pub delta_0: f64,
    pub tau: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        DriveParams { omega_0: DEFAULT_OMEGA_0, delta_0: DEFAULT_DELTA_0, tau: default_tau(DEFAULT_OMEGA_0) }
    }
}

/// Benchmarking protocol settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RbConfig {
    /// N_G
    pub n_sequences: usize,
    /// N_P
    pub n_pauli_randomizations: usize,
    pub lengths: Vec<usize>,
    /// 0 gives exact survival probabilities.
    pub shots: u64,
    pub seed: u64,
    pub substeps: usize,
    pub drive: DriveParams,
    /// Rabi frequency of the rectangular pulses (MHz).
    pub dynamic_rabi: f64,
    pub fit_model: FitModel,
}

impl Default for RbConfig {
    fn default() -> Self {
        RbConfig {
            n_sequences: 4,
            n_pauli_randomizations: 8,
            lengths: DEFAULT_LENGTHS.to_vec(),
            shots: 1000,
            seed: 0,
            substeps: DEFAULT_SUBSTEPS,
            drive: DriveParams::default(),
            dynamic_rabi: DEFAULT_OMEGA_MAX,
            fit_model: FitModel::Survival,
        }
    }
}

impl RbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sequences == 0 || self.n_pauli_randomizations == 0 {
            return Err(Error::InvalidArgument("N_G and N_P must be at least 1".into()));
        }
        if self.lengths.is_empty() || self.lengths.contains(&0) {
            return Err(Error::InvalidArgument("sequence lengths must be >= 1".into()));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidArgument("substeps must be >= 1".into()));
        }
        if !(self.dynamic_rabi > 0.0 && self.dynamic_rabi.is_finite()) {
            return Err(Error::InvalidArgument("dynamic Rabi frequency must be positive".into()));
        }
        GateSpec::phase_gate(0.0)
            .with_drive(self.drive.omega_0, self.drive.delta_0, self.drive.tau)
            .validate()
    }

    pub fn total_sequences(&self) -> usize {
        self.n_sequences * self.n_pauli_randomizations * self.lengths.len()
    }
}

/// One dressed sequence, gates in the order they are played.
#[derive(Debug, Clone, PartialEq)]
pub struct RbSequence {
    pub index: usize,
    pub base_index: usize,
    pub length: usize,
    pub randomization_index: usize,
    pub ops: Vec<GateOp>,
    /// Ideal output is |0⟩ (otherwise |1⟩).
    pub expect_zero: bool,
}

impl RbSequence {
    pub fn ideal_unitary(&self) -> Unitary2 {
        self.ops.iter().fold(Unitary2::IDENTITY, |u, op| op.ideal() * u)
    }
}

fn pick<R: Rng + ?Sized, T: Copy>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// Builds all `N_G · N_l · N_P` sequences.
///
/// Sequences are indexed base-major, then length, then randomization; the
/// same index refers to the same random choices in both gate sets.
pub fn generate_rb_sequences(config: &RbConfig, gateset: GateSet) -> Result<Vec<RbSequence>> {
    config.validate()?;
    let generators = gateset.generators();
    let max_len = config.lengths.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(config.total_sequences());
    for g in 0..config.n_sequences {
        let mut base_rng = stream(config.seed, Domain::BaseSequence, g as u64);
        let base: Vec<usize> = (0..max_len).map(|_| base_rng.random_range(0..4)).collect();
        for (li, &len) in config.lengths.iter().enumerate() {
            let computational: Vec<GateOp> = base[..len].iter().map(|&k| generators[k]).collect();
            let net = computational.iter().fold(Unitary2::IDENTITY, |u, op| op.ideal() * u);
            let psi = net.apply(&QubitState::ZERO);
            let mut final_rng = stream(config.seed, Domain::FinalPulse, (g * config.lengths.len() + li) as u64);
            let admissible: Vec<(GateOp, bool)> = GateOp::FINAL_CANDIDATES
                .iter()
                .filter_map(|op| {
                    let p0 = op.ideal().apply(&psi).p0();
                    if p0 > 1.0 - 1e-9 {
                        Some((*op, true))
                    } else if p0 < 1e-9 {
                        Some((*op, false))
                    } else {
                        None
                    }
                })
                .collect();
            if admissible.is_empty() {
                return Err(Error::Numeric("no final pulse reaches a σ_z eigenstate".into()));
            }
            let (final_op, base_zero) = pick(&mut final_rng, &admissible);
            for p in 0..config.n_pauli_randomizations {
                let index = out.len();
                let mut pauli_rng = stream(config.seed, Domain::PauliFrame, index as u64);
                let frame = |rng: &mut crate::rng::StreamRng| {
                    let op = pick(rng, &GateOp::PAULI_FRAME);
                    match op {
                        GateOp::Identity(_) => {
                            GateOp::Identity(if rng.random::<bool>() { Axis::X } else { Axis::XBar })
                        }
                        other => other,
                    }
                };
                let mut ops = Vec::with_capacity(2 * len + 3);
                for c in &computational {
                    ops.push(frame(&mut pauli_rng));
                    ops.push(*c);
                }
                ops.push(frame(&mut pauli_rng));
                ops.push(final_op);
                ops.push(frame(&mut pauli_rng));
                let mut seq = RbSequence {
                    index,
                    base_index: g,
                    length: len,
                    randomization_index: p,
                    ops,
                    expect_zero: base_zero,
                };
                // Pauli frames may flip the outcome; read it off the ideal product.
                let p0 = seq.ideal_unitary().apply(&QubitState::ZERO).p0();
                if (1e-9..=1.0 - 1e-9).contains(&p0) {
                    return Err(Error::Numeric("dressed sequence does not end in a σ_z eigenstate".into()));
                }
                seq.expect_zero = p0 > 0.5;
                out.push(seq);
            }
        }
    }
    Ok(out)
}

/// Schedule realizing a gate in a gate set.
pub fn gate_schedule(op: GateOp, gateset: GateSet, config: &RbConfig) -> Result<PulseSchedule> {
    let d = config.drive;
    let geometric = |spec: GateSpec| build_schedule(&spec.with_drive(d.omega_0, d.delta_0, d.tau));
    match gateset {
        GateSet::Sagqg => match op {
            GateOp::Identity(_) => geometric(GateSpec::phase_gate(0.0)),
            GateOp::HalfPi(axis) | GateOp::Pi(axis) => {
                let gamma = -op.angle() / 2.0;
                match axis {
                    Axis::Z => geometric(GateSpec::phase_gate(gamma)),
                    Axis::ZBar => geometric(GateSpec::phase_gate(-gamma)),
                    _ => geometric(GateSpec::flip_gate(axis.drive_phase().unwrap_or(0.0), gamma)),
                }
            }
        },
        GateSet::Dynamic => match op {
            GateOp::Identity(axis) => Ok(dynamic_pulse(axis, TWO_PI, config.dynamic_rabi)?.1),
            GateOp::HalfPi(axis) | GateOp::Pi(axis) => Ok(dynamic_pulse(axis, op.angle(), config.dynamic_rabi)?.1),
        },
    }
}

/// Propagates gates under one fixed distortion, caching by gate.
struct GateCache<'a> {
    gateset: GateSet,
    config: &'a RbConfig,
    distortion: Distortion,
    cache: BTreeMap<GateOp, Unitary2>,
}

impl<'a> GateCache<'a> {
    fn new(gateset: GateSet, config: &'a RbConfig, distortion: Distortion) -> Self {
        GateCache { gateset, config, distortion, cache: BTreeMap::new() }
    }

    fn unitary(&mut self, op: GateOp) -> Result<Unitary2> {
        if let Some(u) = self.cache.get(&op) {
            return Ok(*u);
        }
        let sched = gate_schedule(op, self.gateset, self.config)?.with_distortion(self.distortion);
        let u = propagate_schedule(&sched, self.config.substeps)?;
        self.cache.insert(op, u);
        Ok(u)
    }

    fn survival(&mut self, seq: &RbSequence) -> Result<f64> {
        let mut psi = QubitState::ZERO;
        for &op in &seq.ops {
            psi = self.unitary(op)?.apply(&psi);
        }
        let p0 = psi.p0().clamp(0.0, 1.0);
        Ok(if seq.expect_zero { p0 } else { 1.0 - p0 })
    }
}

/// Which form of the decay curve the data are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// Survival probability `F(l) = ((α−1) + (1−αε_m)(1−αε_g)^l)/α`.
    Survival,
    /// Its complement `f(l) = 1 − F(l)`.
    Complement,
}

/// Decay parameters with their covariance (order ε_g, ε_m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbFit {
    pub epsilon_g: f64,
    pub epsilon_m: f64,
    pub covariance: [[f64; 2]; 2],
    /// Residual sum of squares.
    pub residual: f64,
    pub iterations: usize,
}

impl RbFit {
    pub fn sigma_g(&self) -> f64 {
        self.covariance[0][0].sqrt()
    }

    pub fn sigma_m(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }

    pub fn evaluate(&self, length: f64, model: FitModel) -> f64 {
        decay_model(length, self.epsilon_g, self.epsilon_m, model)
    }
}

/// Single-qubit depolarizing constant `α_n = 2ⁿ/(2ⁿ − 1)` for n = 1.
pub const ALPHA: f64 = 2.0;

pub fn decay_model(length: f64, epsilon_g: f64, epsilon_m: f64, model: FitModel) -> f64 {
    let f = ((ALPHA - 1.0) + (1.0 - ALPHA * epsilon_m) * (1.0 - ALPHA * epsilon_g).powf(length)) / ALPHA;
    match model {
        FitModel::Survival => f,
        FitModel::Complement => 1.0 - f,
    }
}

const FIT_MAX_ITERATIONS: usize = 500;

/// Levenberg–Marquardt fit of the decay model.
pub fn fit_rb_decay(lengths: &[f64], values: &[f64], model: FitModel) -> Result<RbFit> {
    if lengths.len() != values.len() {
        return Err(Error::InvalidArgument("lengths and values differ in size".into()));
    }
    if lengths.iter().chain(values).any(|v| !v.is_finite()) || lengths.iter().any(|&l| l < 0.0) {
        return Err(Error::InvalidArgument("fit data must be finite, lengths >= 0".into()));
    }
    let mut distinct: Vec<f64> = lengths.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 distinct lengths".into()));
    }
    let survival: Vec<f64> = match model {
        FitModel::Survival => values.to_vec(),
        FitModel::Complement => values.iter().map(|v| 1.0 - v).collect(),
    };

    let g_max = 1.0 / ALPHA;
    let project = |p: [f64; 2]| [p[0].clamp(0.0, g_max), p[1].clamp(-1.0, 1.0)];
    let residuals = |p: [f64; 2]| -> Vec<f64> {
        lengths.iter().zip(&survival).map(|(&l, &y)| decay_model(l, p[0], p[1], FitModel::Survival) - y).collect()
    };
    let rss = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let jacobian = |p: [f64; 2]| -> Vec<[f64; 2]> {
        let q = 1.0 - ALPHA * p[0];
        let a = 1.0 - ALPHA * p[1];
        lengths
            .iter()
            .map(|&l| {
                let dq = if l == 0.0 { 0.0 } else { l * q.powf(l - 1.0) };
                [-a * dq, -q.powf(l)]
            })
            .collect()
    };
    let normal = |j: &[[f64; 2]], r: &[f64]| {
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for (row, &ri) in j.iter().zip(r) {
            for a in 0..2 {
                jtr[a] += row[a] * ri;
                for b in 0..2 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        (jtj, jtr)
    };

    let mut p = project(initial_guess(lengths, &survival));
    let mut r = residuals(p);
    let mut cost = rss(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        let j = jacobian(p);
        let (jtj, jtr) = normal(&j, &r);
        if jtr[0].abs().max(jtr[1].abs()) < 1e-18 || cost < 1e-32 {
            converged = true;
            break;
        }
        let damped = [
            [jtj[0][0] * (1.0 + lambda) + 1e-300, jtj[0][1]],
            [jtj[1][0], jtj[1][1] * (1.0 + lambda) + 1e-300],
        ];
        let step = match solve2(damped, [-jtr[0], -jtr[1]]) {
            Some(s) => s,
            None => {
                lambda *= 10.0;
                if lambda > 1e16 {
                    break;
                }
                continue;
            }
        };
        let trial = project([p[0] + step[0], p[1] + step[1]]);
        let moved = (trial[0] - p[0]).abs().max((trial[1] - p[1]).abs());
        let tr = residuals(trial);
        let trial_cost = rss(&tr);
        if trial_cost <= cost {
            let gain = cost - trial_cost;
            p = trial;
            r = tr;
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-12);
            if moved < 1e-15 || gain <= 1e-15 * cost {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if moved < 1e-15 || lambda > 1e16 {
                // No descent direction left inside the bounds.
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FitFailed { iterations, residual: cost });
    }

    let (jtj, _) = normal(&jacobian(p), &r);
    let dof = lengths.len().saturating_sub(2);
    let s2 = if dof > 0 { cost / dof as f64 } else { 0.0 };
    let covariance = match invert2(jtj) {
        Some(inv) => [[s2 * inv[0][0], s2 * inv[0][1]], [s2 * inv[1][0], s2 * inv[1][1]]],
        None => [[f64::INFINITY; 2]; 2],
    };
    Ok(RbFit { epsilon_g: p[0], epsilon_m: p[1], covariance, residual: cost, iterations })
}

/// Log-linear estimate from points where `2F − 1` is positive.
fn initial_guess(lengths: &[f64], survival: &[f64]) -> [f64; 2] {
    let pts: Vec<(f64, f64)> = lengths
        .iter()
        .zip(survival)
        .filter_map(|(&l, &y)| {
            let v = ALPHA * y - (ALPHA - 1.0);
            (v > 1e-6).then(|| (l, v.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return [0.01, 0.0];
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return [0.01, 0.0];
    }
    let slope = (sxy / sxx).min(0.0);
    let intercept = my - slope * mx;
    [(1.0 - slope.exp()) / ALPHA, (1.0 - intercept.exp()) / ALPHA]
}

fn solve2(m: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let inv = invert2(m)?;
    Some([inv[0][0] * b[0] + inv[0][1] * b[1], inv[1][0] * b[0] + inv[1][1] * b[1]])
}

fn invert2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let mut big = [[0.0; 4]; 4];
    big[0][0] = m[0][0];
    big[0][1] = m[0][1];
    big[1][0] = m[1][0];
    big[1][1] = m[1][1];
    big[2][2] = 1.0;
    big[3][3] = 1.0;
    let inv = invert4(&big)?;
    Some([[inv[0][0], inv[0][1]], [inv[1][0], inv[1][1]]])
}

/// Outcome of one benchmarking run.
#[derive(Debug, Clone, PartialEq)]
pub struct RbResult {
    pub gateset: GateSet,
    pub lengths: Vec<usize>,
    /// Mean survival per length.
    pub mean: Vec<f64>,
    /// Standard error of the mean per length.
    pub sem: Vec<f64>,
    /// Survival of every sequence, in sequence order.
    pub survivals: Vec<f64>,
    pub fit: RbFit,
    pub fit_model: FitModel,
}

/// Simulates every sequence and fits the decay.
///
/// Sequence `i` draws its noise realization and its shot outcomes from
/// streams keyed by `i`, so the two gate sets see common random numbers.
pub fn run_rb(gateset: GateSet, noise: &NoiseModel, config: &RbConfig) -> Result<RbResult> {
    noise.validate()?;
    let sequences = generate_rb_sequences(config, gateset)?;
    let mut shared = noise.is_deterministic().then(|| GateCache::new(gateset, config, noise.nominal()));
    let mut survivals = Vec::with_capacity(sequences.len());
    for seq in &sequences {
        let exact = match shared.as_mut() {
            Some(cache) => cache.survival(seq)?,
            None => {
                let mut rng = stream(config.seed, Domain::Noise, seq.index as u64);
                GateCache::new(gateset, config, noise.sample(&mut rng)).survival(seq)?
            }
        };
        let value = if config.shots == 0 {
            exact
        } else {
            let mut rng = stream(config.seed, Domain::Shots, seq.index as u64);
            let dist = Binomial::new(config.shots, exact).map_err(|e| Error::Numeric(alloc::format!("{e}")))?;
            dist.sample(&mut rng) as f64 / config.shots as f64
        };
        survivals.push(value);
    }

    let per_length = config.n_pauli_randomizations;
    let mut mean = Vec::with_capacity(config.lengths.len());
    let mut sem = Vec::with_capacity(config.lengths.len());
    for li in 0..config.lengths.len() {
        let values: Vec<f64> = sequences
            .iter()
            .zip(&survivals)
            .filter(|(s, _)| s.length == config.lengths[li] && (s.index / per_length) % config.lengths.len() == li)
            .map(|(_, &v)| v)
            .collect();
        let n = values.len() as f64;
        let m = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 { values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        mean.push(m);
        sem.push((var / n).sqrt());
    }

    let xs: Vec<f64> = config.lengths.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = match config.fit_model {
        FitModel::Survival => mean.clone(),
        FitModel::Complement => mean.iter().map(|m| 1.0 - m).collect(),
    };
    let fit = fit_rb_decay(&xs, &ys, config.fit_model)?;
    Ok(RbResult { gateset, lengths: config.lengths.clone(), mean, sem, survivals, fit, fit_model: config.fit_model })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RbConfig {
        RbConfig { n_sequences: 2, n_pauli_randomizations: 2, lengths: alloc::vec![1, 2, 4, 8], shots: 0, ..RbConfig::default() }
    }

    #[test]
    fn t2_star_calibration() {
        let s = detuning_sigma_from_t2_star(REFERENCE_T2_STAR);
        assert!((s - 0.05296).abs() < 1e-4, "{s}");
    }

    #[test]
    fn default_sequence_count() {
        let seqs = generate_rb_sequences(&RbConfig::default(), GateSet::Sagqg).unwrap();
        assert_eq!(seqs.len(), 416);
        for s in &seqs {
            assert_eq!(s.ops.len(), 2 * s.length + 3);
        }
    }

    #[test]
    fn sequences_end_in_eigenstates() {
        for set in [GateSet::Sagqg, GateSet::Dynamic] {
            for s in generate_rb_sequences(&RbConfig::default(), set).unwrap() {
                let p0 = s.ideal_unitary().apply(&QubitState::ZERO).p0();
                let want = if s.expect_zero { 1.0 } else { 0.0 };
                assert!((p0 - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sequences_reproducible() {
        let a = generate_rb_sequences(&RbConfig::default(), GateSet::Dynamic).unwrap();
        let b = generate_rb_sequences(&RbConfig::default(), GateSet::Dynamic).unwrap();
        assert_eq!(a, b);
        let c = generate_rb_sequences(&RbConfig { seed: 1, ..RbConfig::default() }, GateSet::Dynamic).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gate_schedules_realize_their_gates() {
        let cfg = RbConfig::default();
        for set in [GateSet::Sagqg, GateSet::Dynamic] {
            let ops = set.generators().into_iter().chain(GateOp::PAULI_FRAME).chain([GateOp::Identity(Axis::XBar)]);
            for op in ops {
                let u = propagate_schedule(&gate_schedule(op, set, &cfg).unwrap(), 1024).unwrap();
                let d = u.phase_insensitive_distance(&op.ideal());
                assert!(d < 1e-5, "{set:?} {op:?} {d}");
            }
        }
    }

    #[test]
    fn noise_model_basics() {
        let mut rng = stream(1, Domain::Noise, 0);
        let sched = build_schedule(&GateSpec::pauli_z()).unwrap();
        assert_eq!(sample_noise(&NoiseModel::none(), &mut rng, &sched).unwrap(), sched);
        assert!(NoiseModel::detuning(-1.0).validate().is_err());
        let d = NoiseModel::detuning(0.1).realize([2.0, 5.0, 5.0]);
        assert!((d.detuning_offset - 0.2).abs() < 1e-15);
        assert_eq!(d.amplitude_scale, 1.0);
        assert_eq!(d.time_stretch, 1.0);
    }

    #[test]
    fn fit_recovers_synthetic_parameters() {
        let xs: Vec<f64> = DEFAULT_LENGTHS.iter().map(|&l| l as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&l| decay_model(l, 0.01, 0.02, FitModel::Survival)).collect();
        let fit = fit_rb_decay(&xs, &ys, FitModel::Survival).unwrap();
        assert!((fit.epsilon_g - 0.01).abs() < 1e-6);
        assert!((fit.epsilon_m - 0.02).abs() < 1e-6);
        let comp: Vec<f64> = ys.iter().map(|y| 1.0 - y).collect();
        let fit = fit_rb_decay(&xs, &comp, FitModel::Complement).unwrap();
        assert!((fit.epsilon_g - 0.01).abs() < 1e-6);
    }

    #[test]
    fn fit_flat_curve() {
        assert_eq!(decay_model(17.0, 0.0, 0.03, FitModel::Survival), (1.0 + (1.0 - 0.06)) / 2.0);
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [0.97; 5];
        let fit = fit_rb_decay(&xs, &ys, FitModel::Survival).unwrap();
        assert!(fit.epsilon_g < 1e-9);
        assert!((fit.epsilon_m - 0.03).abs() < 1e-9);
    }

    #[test]
    fn fit_needs_four_lengths() {
        assert!(fit_rb_decay(&[1.0, 2.0, 2.0, 3.0], &[0.9; 4], FitModel::Survival).is_err());
    }

    #[test]
    fn noiseless_runs_are_nearly_perfect() {
        for set in [GateSet::Sagqg, GateSet::Dynamic] {
            let r = run_rb(set, &NoiseModel::none(), &small()).unwrap();
            assert!(r.mean.iter().all(|&m| m >= 1.0 - 1e-4), "{:?}", r.mean);
            assert!(r.fit.epsilon_g < 1e-3);
        }
    }

    #[test]
    fn noisy_run_is_reproducible_and_bounded() {
        let cfg = RbConfig { shots: 100, ..small() };
        let a = run_rb(GateSet::Dynamic, &NoiseModel::detuning(0.5), &cfg).unwrap();
        let b = run_rb(GateSet::Dynamic, &NoiseModel::detuning(0.5), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.survivals.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!((0.0..=1.0).contains(&a.fit.epsilon_g));
    }
}
