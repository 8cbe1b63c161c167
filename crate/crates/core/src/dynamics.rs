//! Hamiltonians and Schrödinger propagation.
//!
//! The propagator is a time-ordered product of exact 2×2 exponentials of the
//! Hamiltonian sampled at substep midpoints. Each factor is unitary to
//! rounding, and the product converges at second order in the step.

use core::f64::consts::PI;

use alloc::vec::Vec;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::qubit::{Hermitian2, QubitState, Unitary2, C64};
use crate::schedule::{PulseSchedule, PulseShape};
use crate::{Error, Result, TWO_PI};

/// Default substeps per schedule segment.
pub const DEFAULT_SUBSTEPS: usize = 256;

/// Anything that yields a Hamiltonian (rad/µs) at time `t` (µs).
pub trait HamiltonianSource {
    fn hamiltonian(&self, t: f64) -> Result<Hermitian2>;
}

impl<F> HamiltonianSource for F
where
    F: Fn(f64) -> Hermitian2,
{
    fn hamiltonian(&self, t: f64) -> Result<Hermitian2> {
        Ok(self(t))
    }
}

/// Rotating-frame Hamiltonian of a schedule: the superadiabatic
/// Hamiltonian `½[[Δ_S, Ω_S e^{−iφ}], [Ω_S e^{iφ}, −Δ_S]]` in angular units.
pub fn rotating_frame_hamiltonian(schedule: &PulseSchedule, t: f64) -> Result<Hermitian2> {
    let s = schedule.sample(t)?;
    Ok(Hermitian2::from_entries(
        0.0,
        PI * s.superadiabatic_detuning,
        C64::from_polar(PI * s.superadiabatic_rabi, -s.phase),
    ))
}

/// Same as [`rotating_frame_hamiltonian`] but left-continuous.
pub fn rotating_frame_hamiltonian_left(schedule: &PulseSchedule, t: f64) -> Result<Hermitian2> {
    let s = schedule.sample_left(t)?;
    Ok(Hermitian2::from_entries(
        0.0,
        PI * s.superadiabatic_detuning,
        C64::from_polar(PI * s.superadiabatic_rabi, -s.phase),
    ))
}

/// Accumulated drive-frame angle `ω_D(t)·t = (ω₀ − 2πΔ(t))·t`.
fn drive_frame_angle(schedule: &PulseSchedule, carrier: f64, t: f64) -> Result<f64> {
    let s = schedule.sample(t)?;
    Ok((carrier - TWO_PI * s.drive_detuning) * t)
}

/// Laboratory-frame Hamiltonian with qubit splitting `carrier` (rad/µs):
/// `½[[ω₀, 2Ω cos(ω_D t + φ)], [2Ω cos(ω_D t + φ), −ω₀]]`.
pub fn lab_frame_hamiltonian(t: f64, carrier: f64, schedule: &PulseSchedule) -> Result<Hermitian2> {
    let s = schedule.sample(t)?;
    let theta = (carrier - TWO_PI * s.drive_detuning) * t;
    let coupling = TWO_PI * s.superadiabatic_rabi * (theta + s.phase).cos();
    Ok(Hermitian2 { e: 0.0, x: coupling, y: 0.0, z: carrier / 2.0 })
}

/// Maps a lab-frame state at time `t` into the drive's rotating frame.
pub fn to_rotating_frame(
    psi: &QubitState,
    t: f64,
    carrier: f64,
    schedule: &PulseSchedule,
) -> Result<QubitState> {
    let theta = drive_frame_angle(schedule, carrier, t)?;
    Ok(Unitary2::rotation([0.0, 0.0, 1.0], -theta).apply(psi))
}

/// Lab-frame Hamiltonian source for a fixed carrier.
pub struct LabFrame<'a> {
    pub schedule: &'a PulseSchedule,
    pub carrier: f64,
}

impl HamiltonianSource for LabFrame<'_> {
    fn hamiltonian(&self, t: f64) -> Result<Hermitian2> {
        lab_frame_hamiltonian(t, self.carrier, self.schedule)
    }
}

/// Rotating-frame Hamiltonian source.
pub struct RotatingFrame<'a>(pub &'a PulseSchedule);

impl HamiltonianSource for RotatingFrame<'_> {
    fn hamiltonian(&self, t: f64) -> Result<Hermitian2> {
        rotating_frame_hamiltonian(self.0, t)
    }
}

/// Propagator `U(t1, t0)` with `substeps` midpoint exponentials.
pub fn propagate<S: HamiltonianSource + ?Sized>(
    source: &S,
    t0: f64,
    t1: f64,
    substeps: usize,
) -> Result<Unitary2> {
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be >= 1".into()));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidArgument("propagation interval must satisfy t0 <= t1".into()));
    }
    if t1 == t0 {
        return Ok(Unitary2::IDENTITY);
    }
    let dt = (t1 - t0) / substeps as f64;
    let mut u = Unitary2::IDENTITY;
    for i in 0..substeps {
        let h = source.hamiltonian(t0 + (i as f64 + 0.5) * dt)?;
        if !h.is_finite() {
            return Err(Error::Numeric("Hamiltonian entry is not finite".into()));
        }
        u = h.exp_step(dt) * u;
    }
    Ok(u)
}

/// Propagator of a whole schedule, `substeps` per segment.
///
/// Rectangular pulses are integrated exactly in one step and frame
/// rotations are applied as `R_z(angle)`.
pub fn propagate_schedule(schedule: &PulseSchedule, substeps: usize) -> Result<Unitary2> {
    match schedule.shape {
        PulseShape::FrameRotation { angle } => Ok(Unitary2::rotation([0.0, 0.0, 1.0], angle)),
        PulseShape::Square { .. } => propagate(&RotatingFrame(schedule), 0.0, schedule.total_time(), 1),
        PulseShape::Superadiabatic(_) => {
            let bounds = schedule.segment_boundaries();
            let src = RotatingFrame(schedule);
            let mut u = Unitary2::IDENTITY;
            for w in bounds.windows(2) {
                u = propagate(&src, w[0], w[1], substeps)? * u;
            }
            Ok(u)
        }
    }
}

/// Doubles the per-segment substeps from [`DEFAULT_SUBSTEPS`] until two
/// successive propagators differ by less than `tol` (Frobenius).
pub fn propagate_converged(schedule: &PulseSchedule, tol: f64) -> Result<Unitary2> {
    let mut n = DEFAULT_SUBSTEPS;
    let mut prev = propagate_schedule(schedule, n)?;
    while n < (1 << 20) {
        n *= 2;
        let next = propagate_schedule(schedule, n)?;
        if next.frobenius_distance(&prev) < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numeric("propagator did not converge".into()))
}

/// Propagator between two times of a schedule, splitting at segment
/// boundaries, with steps no longer than `max_step`.
pub fn propagate_between(schedule: &PulseSchedule, t0: f64, t1: f64, max_step: f64) -> Result<Unitary2> {
    if t1 < t0 {
        return Err(Error::InvalidArgument("propagation interval must satisfy t0 <= t1".into()));
    }
    if !(max_step > 0.0) {
        return Err(Error::InvalidArgument("max_step must be positive".into()));
    }
    if let PulseShape::FrameRotation { angle } = schedule.shape {
        return Ok(Unitary2::rotation([0.0, 0.0, 1.0], angle));
    }
    let src = RotatingFrame(schedule);
    let mut cuts: Vec<f64> = alloc::vec![t0];
    cuts.extend(schedule.segment_boundaries().into_iter().filter(|&b| b > t0 && b < t1));
    cuts.push(t1);
    let mut u = Unitary2::IDENTITY;
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let n = ((len / max_step).ceil() as usize).max(1);
        u = propagate(&src, w[0], w[1], n)? * u;
    }
    Ok(u)
}

/// Step size matching `substeps` per segment for a schedule.
pub fn step_for(schedule: &PulseSchedule, substeps: usize) -> f64 {
    let b = schedule.segment_boundaries();
    let seg = b.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if seg > 0.0 {
        seg / substeps.max(1) as f64
    } else {
        1.0
    }
}

/// States at each of `sample_times`, starting from `state` at t = 0.
pub fn evolve_state(
    state: &QubitState,
    schedule: &PulseSchedule,
    sample_times: &[f64],
    substeps: usize,
) -> Result<Vec<QubitState>> {
    let end = schedule.total_time();
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times must be sorted".into()));
    }
    if let Some(&t) = sample_times.iter().find(|&&t| !(t >= 0.0 && t <= end * (1.0 + 1e-12))) {
        return Err(Error::Domain { t, end });
    }
    let max_step = step_for(schedule, substeps);
    let mut out = Vec::with_capacity(sample_times.len());
    let mut psi = *state;
    let mut now = 0.0;
    for &t in sample_times {
        let t = t.min(end);
        if t > now {
            psi = propagate_between(schedule, now, t, max_step)?.apply(&psi);
            now = t;
        }
        out.push(psi);
    }
    Ok(out)
}

/// Rotation axes of the hardware gate sets. Barred axes negate the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
    XBar,
    YBar,
    ZBar,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::X, Axis::Y, Axis::Z, Axis::XBar, Axis::YBar, Axis::ZBar];

    pub fn vector(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
            Axis::XBar => [-1.0, 0.0, 0.0],
            Axis::YBar => [0.0, -1.0, 0.0],
            Axis::ZBar => [0.0, 0.0, -1.0],
        }
    }

    /// Drive phase that points the in-plane field along this axis.
    pub fn drive_phase(self) -> Option<f64> {
        match self {
            Axis::X => Some(0.0),
            Axis::Y => Some(PI / 2.0),
            Axis::XBar => Some(PI),
            Axis::YBar => Some(-PI / 2.0),
            Axis::Z | Axis::ZBar => None,
        }
    }

    pub fn is_equatorial(self) -> bool {
        self.drive_phase().is_some()
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::XBar => "xbar",
            Axis::YBar => "ybar",
            Axis::ZBar => "zbar",
        }
    }
}

/// Ideal rotation `(θ)_axis = exp(−i θ n·σ / 2)`.
pub fn ideal_rotation(axis: Axis, angle: f64) -> Unitary2 {
    Unitary2::rotation(axis.vector(), angle)
}

/// Rectangular resonant pulse realizing `(angle)_axis` at Rabi frequency
/// `rabi` (MHz). A π pulse lasts `1/(2·rabi)`. z rotations are
/// zero-duration frame updates and ignore `rabi`.
pub fn dynamic_pulse(axis: Axis, angle: f64, rabi: f64) -> Result<(Unitary2, PulseSchedule)> {
    if !angle.is_finite() {
        return Err(Error::InvalidArgument("rotation angle must be finite".into()));
    }
    let ideal = ideal_rotation(axis, angle);
    match axis.drive_phase() {
        None => {
            let signed = if axis == Axis::Z { angle } else { -angle };
            Ok((ideal, PulseSchedule::frame_rotation(signed)))
        }
        Some(phase) => {
            if !(rabi > 0.0 && rabi.is_finite()) {
                return Err(Error::InvalidArgument("physical pulses need rabi > 0".into()));
            }
            let (phase, angle) = if angle < 0.0 { (phase + PI, -angle) } else { (phase, angle) };
            let duration = angle / (TWO_PI * rabi);
            Ok((ideal, PulseSchedule::square(rabi, phase, duration)?))
        }
    }
}
