//! Parameter sweeps: the minimal segment duration map, fidelity against
//! segment duration, phase sweeps and trajectory reconstruction.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::analysis::{bloch_trajectory, stroboscopic_readout, BlochSample};
use crate::benchmarking::NoiseModel;
use crate::dynamics::{evolve_state, ideal_rotation, propagate_schedule, Axis};
use crate::qubit::{QubitState, Unitary2, C64};
use crate::rng::{stream, Domain};
use crate::schedule::{
    build_schedule, max_superadiabatic_rabi, superadiabatic_profile, GateFamily, GateSpec, DEFAULT_POINTS_PER_SEGMENT,
};
use crate::tomography::{ideal_chi, process_fidelity, reconstruct_chi, simulate_qpt, ProcessUnderTest, QptConfig};
use crate::{Error, Result};

/// Duration of a π pulse at Rabi frequency `omega_max`: `1/(2Ω_max)` (µs).
pub fn pi_pulse_time(omega_max: f64) -> f64 {
    0.5 / omega_max
}

/// Evaluates `max_u Ω_S(u; τ)` for one `(Ω₀, Δ₀)` without recomputing the
/// waveform for every τ.
struct RabiProfile {
    points: Vec<(f64, f64)>,
}

impl RabiProfile {
    fn new(omega_0: f64, delta_0: f64, points_per_segment: usize) -> Result<Self> {
        Ok(RabiProfile { points: superadiabatic_profile(GateFamily::Phase, omega_0, delta_0, points_per_segment)? })
    }

    fn max_rabi(&self, tau: f64) -> f64 {
        self.points.iter().fold(0.0_f64, |m, &(r, g)| m.max(r.hypot(g / tau)))
    }

    fn max_envelope(&self) -> f64 {
        self.points.iter().fold(0.0_f64, |m, p| m.max(p.0))
    }
}

const TAU_RELATIVE_TOLERANCE: f64 = 1e-4;

/// Smallest τ (µs) whose peak Ω_S stays within `omega_max`, or `+∞` when
/// no duration suffices.
pub fn tau_min(omega_0: f64, delta_0: f64, omega_max: f64) -> Result<f64> {
    tau_min_with_resolution(omega_0, delta_0, omega_max, DEFAULT_POINTS_PER_SEGMENT)
}

pub fn tau_min_with_resolution(omega_0: f64, delta_0: f64, omega_max: f64, points_per_segment: usize) -> Result<f64> {
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidArgument("omega_max must be positive".into()));
    }
    let profile = RabiProfile::new(omega_0, delta_0, points_per_segment)?;
    if profile.max_envelope() > omega_max {
        return Ok(f64::INFINITY);
    }
    let f = |tau: f64| profile.max_rabi(tau);

    let mut hi = pi_pulse_time(omega_max);
    while f(hi) > omega_max {
        hi *= 2.0;
        if hi > 1e9 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = hi;
    while f(lo) <= omega_max {
        lo *= 0.5;
        if lo < 1e-12 {
            return Ok(0.0);
        }
    }
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    while hi - lo > TAU_RELATIVE_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if !(fm <= f_lo && fm >= f_hi) {
            return Ok(tau_min_scan(&f, lo, hi, omega_max));
        }
        if fm > omega_max {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Ok(hi)
}

/// Fallback when the peak amplitude is not monotone in τ on the bracket.
fn tau_min_scan(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, omega_max: f64) -> f64 {
    let n = (1.0 / TAU_RELATIVE_TOLERANCE) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).find(|&t| f(t) <= omega_max).unwrap_or(hi)
}

/// Rectangular grid over `(Ω₀, Δ₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    /// Inclusive Ω₀ range (MHz).
    pub omega_0: (f64, f64),
    /// Inclusive Δ₀ range (MHz).
    pub delta_0: (f64, f64),
    /// Number of nodes along (Ω₀, Δ₀).
    pub resolution: (usize, usize),
    pub omega_max: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { omega_0: (0.5, 3.5), delta_0: (0.5, 8.0), resolution: (64, 64), omega_max: 7.0 }
    }
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![range.0];
    }
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = |r: (f64, f64)| r.0 > 0.0 && r.1 >= r.0 && r.1.is_finite();
        if !ok(self.omega_0) || !ok(self.delta_0) {
            return Err(Error::InvalidArgument("grid ranges must be positive, finite and ordered".into()));
        }
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(Error::InvalidArgument("grid resolution must be at least 1".into()));
        }
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(Error::InvalidArgument("omega_max must be positive".into()));
        }
        Ok(())
    }

    pub fn omega_0_values(&self) -> Vec<f64> {
        linspace(self.omega_0, self.resolution.0)
    }

    pub fn delta_0_values(&self) -> Vec<f64> {
        linspace(self.delta_0, self.resolution.1)
    }
}

/// τ_min over a grid; `tau[i][j]` belongs to `(omega_0[i], delta_0[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauMinMap {
    pub omega_0: Vec<f64>,
    pub delta_0: Vec<f64>,
    pub tau: Vec<Vec<f64>>,
}

impl TauMinMap {
    /// Smallest entry as `(τ, Ω₀, Δ₀)`.
    pub fn minimum(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for (i, row) in self.tau.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                if best.is_none_or(|b| t < b.0) {
                    best = Some((t, self.omega_0[i], self.delta_0[j]));
                }
            }
        }
        best
    }
}

pub fn tau_min_map(grid: &SweepGrid) -> Result<TauMinMap> {
    grid.validate()?;
    let omega_0 = grid.omega_0_values();
    let delta_0 = grid.delta_0_values();
    let tau = omega_0
        .iter()
        .map(|&o| delta_0.iter().map(|&d| tau_min(o, d, grid.omega_max)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(TauMinMap { omega_0, delta_0, tau })
}

/// A named `(Ω₀, Δ₀)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet {
    pub name: &'static str,
    pub omega_0: f64,
    pub delta_0: f64,
}

pub const PARAMETER_SETS: [ParameterSet; 3] = [
    ParameterSet { name: "A", omega_0: 1.5, delta_0: 1.5 },
    ParameterSet { name: "B", omega_0: 1.5, delta_0: 6.0 },
    ParameterSet { name: "C", omega_0: 2.0, delta_0: 8.0 },
];

pub fn parameter_set(name: &str) -> Option<ParameterSet> {
    PARAMETER_SETS.iter().copied().find(|p| p.name.eq_ignore_ascii_case(name))
}

/// Evenly spaced durations spanning `[0.5 t_π, 1.5 t_π]`.
pub fn default_tau_values(omega_max: f64, n: usize) -> Vec<f64> {
    let t_pi = pi_pulse_time(omega_max);
    linspace((0.5 * t_pi, 1.5 * t_pi), n.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPoint {
    pub tau: f64,
    pub fidelity: f64,
}

/// Noiseless process fidelity of the Pauli-X gate with Ω_S clipped at
/// `omega_max`, for each segment duration.
pub fn fidelity_vs_tau(
    omega_0: f64,
    delta_0: f64,
    tau_values: &[f64],
    omega_max: f64,
    substeps: usize,
) -> Result<Vec<FidelityPoint>> {
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidArgument("omega_max must be positive".into()));
    }
    let target = ideal_chi(&Unitary2::pauli_x())?;
    let mut rng = stream(0, Domain::Tomography, 0);
    tau_values
        .iter()
        .map(|&tau| {
            let spec = GateSpec::pauli_x().with_drive(omega_0, delta_0, tau);
            let schedule = build_schedule(&spec)?.with_rabi_clip(omega_max);
            let u = propagate_schedule(&schedule, substeps)?;
            let config = QptConfig { shots: 0, substeps, ..QptConfig::default() };
            let records = simulate_qpt(&ProcessUnderTest::Unitary(u), &NoiseModel::none(), &config, &mut rng)?;
            let chi = reconstruct_chi(&records)?;
            Ok(FidelityPoint { tau, fidelity: process_fidelity(&chi, &target) })
        })
        .collect()
}

/// Peak Ω_S of a gate family on the default grid.
pub fn peak_rabi(spec: &GateSpec) -> Result<f64> {
    max_superadiabatic_rabi(spec.family, spec.omega_0, spec.delta_0, spec.tau, DEFAULT_POINTS_PER_SEGMENT)
}

/// |0⟩ and (|0⟩ − |1⟩)/√2.
pub fn default_sweep_states() -> [QubitState; 2] {
    [QubitState::ZERO, QubitState([C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)])]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPoint {
    pub gamma: f64,
    pub state_index: usize,
    pub p0: f64,
}

/// |0⟩ population after the gate with phase `γ` and a (π/2)_ȳ readout.
///
/// `base` supplies the family, axis and drive; its phase offsets are
/// replaced for every γ.
pub fn gamma_sweep(
    initial_states: &[QubitState],
    gamma_values: &[f64],
    base: &GateSpec,
    substeps: usize,
) -> Result<Vec<GammaPoint>> {
    if let Some(g) = gamma_values.iter().find(|&&g| !(g > 0.0 && g < crate::TWO_PI)) {
        return Err(Error::InvalidArgument(alloc::format!("gamma {g} outside (0, 2π)")));
    }
    let readout = ideal_rotation(Axis::YBar, FRAC_PI_2);
    let mut out = Vec::with_capacity(initial_states.len() * gamma_values.len());
    for &gamma in gamma_values {
        let u = propagate_schedule(&build_schedule(&base.with_gamma(gamma))?, substeps)?;
        for (i, psi) in initial_states.iter().enumerate() {
            let p0 = readout.apply(&u.apply(psi)).p0();
            out.push(GammaPoint { gamma, state_index: i, p0 });
        }
    }
    Ok(out)
}

/// Directly computed and readout-reconstructed Bloch trajectories of |0⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub states: Vec<QubitState>,
    pub direct: Vec<BlochSample>,
    pub reconstructed: Vec<BlochSample>,
}

pub fn trajectory_experiment(spec: &GateSpec, n_samples: usize, substeps: usize) -> Result<TrajectoryResult> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let schedule = build_schedule(spec)?;
    let end = schedule.total_time();
    let times: Vec<f64> =
        (0..n_samples).map(|i| if i + 1 == n_samples { end } else { end * i as f64 / (n_samples - 1) as f64 }).collect();
    let states = evolve_state(&QubitState::ZERO, &schedule, &times, substeps)?;
    let direct = bloch_trajectory(&times, &states)?;
    let reconstructed = stroboscopic_readout(&times, &states)
        .iter()
        .map(|r| {
            let [x, y, z] = r.reconstruct();
            BlochSample { t: r.t, x, y, z }
        })
        .collect();
    Ok(TrajectoryResult { states, direct, reconstructed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    /// Independent bound: `τ ≥ |τΩ_C| / √(Ω_max² − Ω_R²)` at every grid point.
    fn tau_min_closed_form(omega_0: f64, delta_0: f64, omega_max: f64) -> f64 {
        superadiabatic_profile(GateFamily::Phase, omega_0, delta_0, DEFAULT_POINTS_PER_SEGMENT)
            .unwrap()
            .iter()
            .map(|&(r, g)| if g == 0.0 { 0.0 } else { g.abs() / (omega_max * omega_max - r * r).sqrt() })
            .fold(0.0, f64::max)
    }

    #[test]
    fn tau_min_matches_closed_form() {
        for p in PARAMETER_SETS {
            let t = tau_min(p.omega_0, p.delta_0, 7.0).unwrap();
            let want = tau_min_closed_form(p.omega_0, p.delta_0, 7.0);
            assert!((t - want).abs() <= 2e-4 * want, "{} {t} {want}", p.name);
            let peak = max_superadiabatic_rabi(GateFamily::Phase, p.omega_0, p.delta_0, t, DEFAULT_POINTS_PER_SEGMENT)
                .unwrap();
            assert!(peak <= 7.0 + 1e-12);
        }
    }

    #[test]
    fn infeasible_envelope_is_infinite() {
        assert_eq!(tau_min(3.6, 1.0, 7.0).unwrap(), f64::INFINITY);
        assert!(tau_min(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn single_node_map() {
        let grid = SweepGrid { omega_0: (1.5, 1.5), delta_0: (1.5, 1.5), resolution: (1, 1), omega_max: 7.0 };
        let map = tau_min_map(&grid).unwrap();
        assert_eq!(map.tau, alloc::vec![alloc::vec![tau_min(1.5, 1.5, 7.0).unwrap()]]);
    }

    #[test]
    fn rows_increase_with_detuning_above_envelope() {
        // Below Δ₀ ≈ Ω₀ the field direction swings abruptly near the poles
        // and τ_min grows again as Δ₀ shrinks.
        let grid = SweepGrid { resolution: (4, 16), ..SweepGrid::default() };
        let map = tau_min_map(&grid).unwrap();
        for (i, row) in map.tau.iter().enumerate() {
            let tail: Vec<f64> =
                row.iter().zip(&map.delta_0).filter(|(_, &d)| d >= map.omega_0[i]).map(|(&t, _)| t).collect();
            assert!(tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-4)), "{tail:?}");
        }
        let low = map.tau[3][0];
        assert!(low > map.tau[3][1], "small detuning is slower");
    }

    #[test]
    fn map_minimum_is_pi_pulse_time() {
        let grid = SweepGrid { resolution: (16, 16), ..SweepGrid::default() };
        let (t, _, _) = tau_min_map(&grid).unwrap().minimum().unwrap();
        assert!((t / pi_pulse_time(7.0) - 1.0).abs() < 0.01, "{t}");
    }

    #[test]
    fn z_rotation_sweep_matches_algebra() {
        let gammas: Vec<f64> = (1..12).map(|i| i as f64 * PI / 6.0).collect();
        let pts = gamma_sweep(&default_sweep_states(), &gammas, &GateSpec::pauli_z(), 512).unwrap();
        for p in pts {
            let want = if p.state_index == 0 { 0.5 } else { (1.0 - (2.0 * p.gamma).cos()) / 2.0 };
            assert!((p.p0 - want).abs() < 1e-5, "{p:?} {want}");
        }
        assert!(gamma_sweep(&default_sweep_states(), &[0.0], &GateSpec::pauli_z(), 64).is_err());
    }

    #[test]
    fn trajectory_endpoints_and_readout() {
        let r = trajectory_experiment(&GateSpec::pauli_z(), 2, 256).unwrap();
        assert_eq!(r.direct.len(), 2);
        let r = trajectory_experiment(&GateSpec::pauli_z(), 201, 256).unwrap();
        let last = r.direct.last().unwrap();
        assert!((last.z - 1.0).abs() < 1e-3);
        assert!((r.direct[100].z + 1.0).abs() < 1e-2);
        for (a, b) in r.direct.iter().zip(&r.reconstructed) {
            assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9 && (a.z - b.z).abs() < 1e-9);
        }
    }
}
