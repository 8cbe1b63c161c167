//! Bloch trajectories, enclosed solid angles and phase bookkeeping.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use alloc::vec::Vec;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{ideal_rotation, rotating_frame_hamiltonian, rotating_frame_hamiltonian_left, Axis};
use crate::qubit::{QubitState, Unitary2, C64};
use crate::schedule::{build_schedule, wrap_angle, GateFamily, GateSpec, PulseSchedule};
use crate::{Error, Result};

/// Tolerance on the norm of states passed to [`bloch_vector`].
pub const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochSample {
    pub fn vector(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Phases acquired by one cyclic state over a full gate (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition {
    pub total: f64,
    pub dynamic: f64,
    pub geometric: f64,
}

/// (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) without a normalization check.
pub fn bloch_components(psi: &QubitState) -> [f64; 3] {
    let [a, b] = psi.0;
    let c = a.conj() * b;
    [2.0 * c.re, 2.0 * c.im, a.norm_sqr() - b.norm_sqr()]
}

/// Bloch vector of a normalized state.
pub fn bloch_vector(psi: &QubitState) -> Result<[f64; 3]> {
    let n = psi.norm();
    if !((n - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::InvalidArgument(alloc::format!("state norm {n} is not 1")));
    }
    Ok(bloch_components(psi))
}

/// Bloch samples of a state trajectory.
pub fn bloch_trajectory(times: &[f64], states: &[QubitState]) -> Result<Vec<BlochSample>> {
    if times.len() != states.len() {
        return Err(Error::InvalidArgument("times and states differ in length".into()));
    }
    times
        .iter()
        .zip(states)
        .map(|(&t, psi)| {
            let [x, y, z] = bloch_vector(psi)?;
            Ok(BlochSample { t, x, y, z })
        })
        .collect()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    if n == 0.0 {
        v
    } else {
        [v[0] / n, v[1] / n, v[2] / n]
    }
}

/// Signed area of the geodesic triangle (p, a, b) on the unit sphere.
fn triangle_area(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let num = dot(p, cross(a, b));
    let den = 1.0 + dot(p, a) + dot(a, b) + dot(b, p);
    2.0 * num.atan2(den)
}

/// Reference point whose antipode stays farthest from every sample; the
/// triangle fan is singular only when an edge passes through the antipode.
fn reference_pole(points: &[[f64; 3]]) -> [f64; 3] {
    let s = FRAC_1_SQRT_2;
    let t = 1.0 / 3.0_f64.sqrt();
    let mut candidates: Vec<[f64; 3]> = Vec::new();
    for &v in &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        candidates.push(v);
        candidates.push([-v[0], -v[1], -v[2]]);
    }
    for &sx in &[-1.0, 1.0] {
        for &sy in &[-1.0, 1.0] {
            candidates.push([sx * s, sy * s, 0.0]);
            candidates.push([sx * s, 0.0, sy * s]);
            candidates.push([0.0, sx * s, sy * s]);
            for &sz in &[-1.0, 1.0] {
                candidates.push([sx * t, sy * t, sz * t]);
            }
        }
    }
    let clearance = |p: &[f64; 3]| {
        points
            .iter()
            .map(|q| {
                let d = [q[0] + p[0], q[1] + p[1], q[2] + p[2]];
                dot(d, d)
            })
            .fold(f64::INFINITY, f64::min)
    };
    candidates
        .into_iter()
        .max_by(|a, b| clearance(a).total_cmp(&clearance(b)))
        .unwrap_or([0.0, 0.0, 1.0])
}

/// Signed solid angle enclosed by a closed Bloch trajectory (sr).
///
/// The loop is decomposed into a fan of geodesic triangles from a reference
/// point chosen away from the path. Positive values mean counter-clockwise
/// circulation seen from outside the sphere. The enclosed area is defined
/// modulo 4π; the returned value lies in (−4π, 4π).
pub fn solid_angle(trajectory: &[BlochSample]) -> Result<f64> {
    if trajectory.len() < 2 {
        return Ok(0.0);
    }
    let first = trajectory[0].vector();
    let last = trajectory[trajectory.len() - 1].vector();
    let gap = [first[0] - last[0], first[1] - last[1], first[2] - last[2]];
    let distance = dot(gap, gap).sqrt();
    if !(distance <= 1e-3) {
        return Err(Error::OpenTrajectory { distance });
    }
    let points: Vec<[f64; 3]> = trajectory.iter().map(|s| normalized(s.vector())).collect();
    let p = reference_pole(&points);
    let n = points.len();
    let mut area = 0.0;
    for k in 0..n {
        let a = points[k];
        let b = points[(k + 1) % n];
        area += triangle_area(p, a, b);
    }
    Ok(area)
}

/// Orthonormal states that return to themselves after the gate: the
/// eigenstates of the uncorrected Hamiltonian at t = 0, the higher-energy
/// one first.
pub fn cyclic_states(spec: &GateSpec) -> Result<(QubitState, QubitState)> {
    spec.validate()?;
    Ok(match spec.family {
        GateFamily::Phase => (QubitState::ZERO, QubitState::ONE),
        GateFamily::Flip => {
            let a = spec.axis_phase + spec.phase_offset_1;
            let s = C64::new(FRAC_1_SQRT_2, 0.0);
            let e = C64::from_polar(FRAC_1_SQRT_2, a);
            (QubitState([s, e]), QubitState([s, -e]))
        }
    })
}

/// Dynamic phase `−∫⟨ψ|H|ψ⟩dt` by the trapezoidal rule.
///
/// Each interval uses the right-continuous Hamiltonian at its start and the
/// left limit at its end, so jumps of the drive are handled exactly when the
/// sample grid contains the segment boundaries. The result is checked by
/// step halving; a discrepancy above `1e-4` rad is an error.
pub fn dynamic_phase(schedule: &PulseSchedule, times: &[f64], states: &[QubitState]) -> Result<f64> {
    if times.len() != states.len() {
        return Err(Error::InvalidArgument("times and states differ in length".into()));
    }
    if times.len() < 2 {
        return Ok(0.0);
    }
    let mut right = Vec::with_capacity(times.len());
    let mut left = Vec::with_capacity(times.len());
    for (&t, psi) in times.iter().zip(states) {
        right.push(rotating_frame_hamiltonian(schedule, t)?.expectation(psi));
        left.push(rotating_frame_hamiltonian_left(schedule, t)?.expectation(psi));
    }
    let full: f64 = (0..times.len() - 1)
        .map(|i| 0.5 * (times[i + 1] - times[i]) * (right[i] + left[i + 1]))
        .sum();
    if times.len() >= 5 {
        let idx: Vec<usize> = (0..times.len()).step_by(2).chain(core::iter::once(times.len() - 1)).collect();
        let mut coarse = 0.0;
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            if i != j {
                coarse += 0.5 * (times[j] - times[i]) * (right[i] + left[j]);
            }
        }
        let discrepancy = (full - coarse).abs() / 3.0;
        if discrepancy > 1e-4 {
            return Err(Error::TooSparse { discrepancy });
        }
    }
    Ok(-full)
}

/// Phases of both cyclic states over the full gate, `substeps` per segment.
pub fn extract_geometric_phase(spec: &GateSpec, substeps: usize) -> Result<[PhaseDecomposition; 2]> {
    let schedule = build_schedule(spec)?;
    let n = substeps.max(2) & !1;
    let times = segment_grid(&schedule, n);
    let (plus, minus) = cyclic_states(spec)?;
    let mut out = [PhaseDecomposition { total: 0.0, dynamic: 0.0, geometric: 0.0 }; 2];
    for (slot, start) in out.iter_mut().zip([plus, minus]) {
        let states = crate::dynamics::evolve_state(&start, &schedule, &times, n)?;
        let end = states[states.len() - 1];
        let overlap = start.inner(&end);
        if overlap.norm() < 0.999 {
            return Err(Error::NotCyclic { overlap: overlap.norm() });
        }
        let total = overlap.arg();
        let dynamic = dynamic_phase(&schedule, &times, &states)?;
        *slot = PhaseDecomposition { total, dynamic, geometric: wrap_angle(total - dynamic) };
    }
    Ok(out)
}

/// Uniform grid with `n` intervals per segment, containing every boundary.
pub fn segment_grid(schedule: &PulseSchedule, n: usize) -> Vec<f64> {
    let b = schedule.segment_boundaries();
    let mut times = alloc::vec![b[0]];
    for w in b.windows(2) {
        for j in 1..n {
            times.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
        }
        times.push(w[1]);
    }
    times
}

/// |0⟩ populations under the three readout settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSample {
    pub t: f64,
    /// After a (π/2)_x pulse; maps ⟨σy⟩ onto ⟨σz⟩.
    pub p0_x: f64,
    /// After a (π/2)_y pulse; maps −⟨σx⟩ onto ⟨σz⟩.
    pub p0_y: f64,
    /// No readout pulse.
    pub p0_direct: f64,
}

impl ReadoutSample {
    /// Bloch vector recovered as `2P₀ − 1` per setting.
    pub fn reconstruct(&self) -> [f64; 3] {
        [1.0 - 2.0 * self.p0_y, 2.0 * self.p0_x - 1.0, 2.0 * self.p0_direct - 1.0]
    }
}

/// Readout pulses in the fixed sign convention `(θ)_a = exp(−iθ a·σ/2)`.
pub fn readout_pulses() -> (Unitary2, Unitary2) {
    (ideal_rotation(Axis::X, PI / 2.0), ideal_rotation(Axis::Y, PI / 2.0))
}

/// Simulates the projective readout of each sample with ideal π/2 pulses.
pub fn stroboscopic_readout(times: &[f64], states: &[QubitState]) -> Vec<ReadoutSample> {
    let (rx, ry) = readout_pulses();
    times
        .iter()
        .zip(states)
        .map(|(&t, psi)| ReadoutSample {
            t,
            p0_x: rx.apply(psi).p0(),
            p0_y: ry.apply(psi).p0(),
            p0_direct: psi.p0(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::Hermitian2;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn bloch_examples() {
        let s = FRAC_1_SQRT_2;
        assert!(close(bloch_vector(&QubitState::ZERO).unwrap(), [0.0, 0.0, 1.0], 1e-15));
        let plus = QubitState([C64::new(s, 0.0), C64::new(s, 0.0)]);
        assert!(close(bloch_vector(&plus).unwrap(), [1.0, 0.0, 0.0], 1e-15));
        let plus_i = QubitState([C64::new(s, 0.0), C64::new(0.0, s)]);
        assert!(close(bloch_vector(&plus_i).unwrap(), [0.0, 1.0, 0.0], 1e-15));
        let bad = QubitState([C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(bloch_vector(&bad).is_err());
    }

    fn great_circle(n: usize) -> Vec<BlochSample> {
        (0..=n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                BlochSample { t: i as f64, x: a.cos(), y: a.sin(), z: 0.0 }
            })
            .collect()
    }

    #[test]
    fn great_circle_encloses_hemisphere() {
        let a = solid_angle(&great_circle(400)).unwrap();
        assert!((a.abs() - 2.0 * PI).abs() < 1e-9, "{a}");
    }

    #[test]
    fn point_trajectory_is_zero() {
        let p = [BlochSample { t: 0.0, x: 0.0, y: 0.0, z: 1.0 }; 5];
        assert_eq!(solid_angle(&p).unwrap(), 0.0);
    }

    #[test]
    fn open_trajectory_rejected() {
        let mut c = great_circle(100);
        c.truncate(50);
        assert!(matches!(solid_angle(&c), Err(Error::OpenTrajectory { .. })));
    }

    #[test]
    fn orange_slice_area_is_twice_opening() {
        // Down the φ = 0 meridian, up the φ = π/2 meridian.
        let n = 500;
        let mut pts = Vec::new();
        for i in 0..=n {
            let th = PI * i as f64 / n as f64;
            pts.push(BlochSample { t: 0.0, x: th.sin(), y: 0.0, z: th.cos() });
        }
        for i in 1..=n {
            let th = PI * (1.0 - i as f64 / n as f64);
            pts.push(BlochSample { t: 0.0, x: 0.0, y: th.sin(), z: th.cos() });
        }
        let a = solid_angle(&pts).unwrap();
        assert!((a.abs() - PI).abs() < 1e-9, "{a}");
    }

    #[test]
    fn cyclic_state_examples() {
        let (p, m) = cyclic_states(&GateSpec::pauli_z()).unwrap();
        assert_eq!((p, m), (QubitState::ZERO, QubitState::ONE));
        let (p, m) = cyclic_states(&GateSpec::pauli_x()).unwrap();
        assert!(p.inner(&m).norm() < 1e-12);
        assert!(close(bloch_vector(&p).unwrap(), [1.0, 0.0, 0.0], 1e-12));
        assert!(close(bloch_vector(&m).unwrap(), [-1.0, 0.0, 0.0], 1e-12));
    }

    #[test]
    fn dynamic_phase_of_stationary_state() {
        // Constant H = (E/2)σz on |0⟩ for time T: −(E/2)·T.
        let sched = PulseSchedule::square(0.0, 0.0, 2.0).unwrap().with_distortion(crate::schedule::Distortion {
            detuning_offset: 0.5,
            ..Default::default()
        });
        let times: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
        let states = alloc::vec![QubitState::ZERO; times.len()];
        let phi = dynamic_phase(&sched, &times, &states).unwrap();
        // H = π·0.5·σz, ⟨0|H|0⟩ = π/2
        assert!((phi + PI / 2.0 * 2.0).abs() < 1e-12);
        let zero = PulseSchedule::square(0.0, 0.0, 2.0).unwrap();
        assert_eq!(dynamic_phase(&zero, &times, &states).unwrap(), 0.0);
        let _ = Hermitian2::ZERO;
    }

    #[test]
    fn readout_convention() {
        let s = FRAC_1_SQRT_2;
        let plus = QubitState([C64::new(s, 0.0), C64::new(s, 0.0)]);
        let r = stroboscopic_readout(&[0.0], &[plus])[0];
        assert!(r.p0_y.abs() < 1e-15);
        assert!((r.p0_direct - 0.5).abs() < 1e-15);
        let r = stroboscopic_readout(&[0.0], &[QubitState::ZERO])[0];
        assert_eq!(r.p0_direct, 1.0);
    }
}
