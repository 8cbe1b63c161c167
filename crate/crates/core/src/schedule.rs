//! Driving-field synthesis for the superadiabatic geometric gate family.
//!
//! A gate runs for four segments of length `τ`. On each segment the Rabi
//! envelope `Ω_R` and the superadiabatic detuning `Δ_S` follow raised-cosine
//! ramps whose orientation depends on the gate family. The transitionless
//! correction `Ω_C` is the angular velocity of the adiabatic field direction,
//! and the played field is `Ω_S = √(Ω_R² + Ω_C²)` at phase
//! `φ + φ̃(t) + φ_S(t)` with `φ_S = atan2(Ω_C, Ω_R)`. The drive detuning
//! `Δ(t)` solves `Δ + Δ̇t = Δ_S`, i.e. it is the running mean of `Δ_S`.
//!
//! Evaluators are right-continuous at the interior boundaries `τ, 2τ, 3τ`;
//! the `*_left` variants return the left limits.

use core::f64::consts::PI;

use alloc::format;
use alloc::vec::Vec;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, TWO_PI};

/// Default Rabi amplitude parameter Ω₀ (MHz).
pub const DEFAULT_OMEGA_0: f64 = 3.5;
/// Default detuning amplitude parameter Δ₀ (MHz).
pub const DEFAULT_DELTA_0: f64 = 1.0;
/// Default hardware Rabi limit used for τ_min maps (MHz).
pub const DEFAULT_OMEGA_MAX: f64 = 7.0;
/// Default number of grid points per segment for waveform maxima.
pub const DEFAULT_POINTS_PER_SEGMENT: usize = 4096;

/// Default segment length `0.8/(2Ω₀)`.
///
/// The published setting reads `τ = 2π × 0.8/(2Ω₀)`; the `2π` there turns
/// the ordinary-frequency `Ω₀` into angular units, so in µs with `Ω₀` in MHz
/// the segment is `0.8/(2Ω₀)` (≈ 114.3 ns at 3.5 MHz). Taking the `2π`
/// literally would give ≈ 718 ns.
pub fn default_tau(omega_0: f64) -> f64 {
    0.8 / (2.0 * omega_0)
}

/// Orientation of the segment ramps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateFamily {
    /// z-type gates: cyclic states are |0⟩ and |1⟩; the offset switches at 2τ.
    Phase,
    /// x/y-type gates: cyclic states lie on the equator; the offset is φ̃₂
    /// on [τ, 3τ).
    Flip,
}

/// Parameters of one gate in the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub family: GateFamily,
    /// φ̃₁ (rad)
    pub phase_offset_1: f64,
    /// φ̃₂ (rad)
    pub phase_offset_2: f64,
    /// Global axis phase φ (π/2 turns an x-gate into a y-gate).
    pub axis_phase: f64,
    /// Ω₀ (MHz)
    pub omega_0: f64,
    /// Δ₀ (MHz)
    pub delta_0: f64,
    /// Segment length τ (µs)
    pub tau: f64,
}

impl GateSpec {
    /// Phase gate `diag(e^{iγ}, e^{−iγ})` with default drive parameters.
    pub fn phase_gate(gamma: f64) -> Self {
        GateSpec {
            family: GateFamily::Phase,
            phase_offset_1: 0.0,
            phase_offset_2: wrap_positive(PI - gamma),
            axis_phase: 0.0,
            omega_0: DEFAULT_OMEGA_0,
            delta_0: DEFAULT_DELTA_0,
            tau: default_tau(DEFAULT_OMEGA_0),
        }
    }

    /// Flip gate `exp(iγ n·σ)` about the equatorial axis at azimuth
    /// `axis_phase`, with default drive parameters.
    pub fn flip_gate(axis_phase: f64, gamma: f64) -> Self {
        GateSpec {
            family: GateFamily::Flip,
            phase_offset_1: 0.0,
            phase_offset_2: wrap_positive(PI - gamma),
            axis_phase,
            omega_0: DEFAULT_OMEGA_0,
            delta_0: DEFAULT_DELTA_0,
            tau: default_tau(DEFAULT_OMEGA_0),
        }
    }

    /// φ̃₁ = 0, φ̃₂ = π/2.
    pub fn pauli_z() -> Self {
        Self::phase_gate(PI / 2.0)
    }

    pub fn pauli_x() -> Self {
        Self::flip_gate(0.0, PI / 2.0)
    }

    pub fn pauli_y() -> Self {
        Self::flip_gate(PI / 2.0, PI / 2.0)
    }

    /// Hadamard as two gates in playing order: a π rotation about z, then
    /// a π/2 rotation about y. The product is `H` up to a global phase.
    pub fn hadamard_sequence() -> [Self; 2] {
        [Self::pauli_z(), Self::flip_gate(PI / 2.0, -PI / 4.0)]
    }

    pub fn with_drive(mut self, omega_0: f64, delta_0: f64, tau: f64) -> Self {
        self.omega_0 = omega_0;
        self.delta_0 = delta_0;
        self.tau = tau;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Re-targets the phase offsets so the gate acquires `gamma`, keeping φ̃₁.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.phase_offset_2 = wrap_positive(self.phase_offset_1 + PI - gamma);
        self
    }

    /// Geometric phase `γ = π − (φ̃₂ − φ̃₁)`, wrapped to (−π, π].
    pub fn gamma(&self) -> f64 {
        wrap_angle(PI - (self.phase_offset_2 - self.phase_offset_1))
    }

    pub fn total_time(&self) -> f64 {
        4.0 * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.phase_offset_1,
            self.phase_offset_2,
            self.axis_phase,
            self.omega_0,
            self.delta_0,
            self.tau,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        if self.omega_0 <= 0.0 {
            return Err(Error::InvalidSpec(format!("omega_0 must be > 0, got {}", self.omega_0)));
        }
        if self.delta_0 < 0.0 {
            return Err(Error::InvalidSpec(format!("delta_0 must be >= 0, got {}", self.delta_0)));
        }
        if self.tau <= 0.0 {
            return Err(Error::InvalidSpec(format!("tau must be > 0, got {}", self.tau)));
        }
        Ok(())
    }

    /// Ideal target operation of the gate, up to integrator error.
    pub fn ideal_unitary(&self) -> crate::Unitary2 {
        let g = self.gamma();
        match self.family {
            GateFamily::Phase => crate::Unitary2::rotation([0.0, 0.0, 1.0], -2.0 * g),
            GateFamily::Flip => {
                let a = self.axis_phase + self.phase_offset_1;
                crate::Unitary2::rotation([a.cos(), a.sin(), 0.0], -2.0 * g)
            }
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let end = self.total_time();
        if !(t >= 0.0 && t <= end * (1.0 + 1e-12)) {
            return Err(Error::Domain { t, end });
        }
        Ok(())
    }

    /// Sign pattern of segment `k`: +1 where `Ω_R` rises as `1 − cos`.
    fn orientation(&self, k: usize) -> f64 {
        let even = k.is_multiple_of(2);
        match (self.family, even) {
            (GateFamily::Phase, true) | (GateFamily::Flip, false) => 1.0,
            _ => -1.0,
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a - TWO_PI * ((a + PI) / TWO_PI).floor();
    // floor puts exact odd multiples of π at −π
    if w <= -PI {
        w + TWO_PI
    } else {
        w
    }
}

/// Wraps an angle into [0, 2π).
pub fn wrap_positive(a: f64) -> f64 {
    let w = a - TWO_PI * (a / TWO_PI).floor();
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Right,
    Left,
}

/// Segment index and local coordinate `u ∈ [0, 1]` of time `t`.
fn locate(t: f64, tau: f64, side: Side) -> (usize, f64) {
    let mut s = t / tau;
    // Times meant to sit on a boundary arrive a few ulps off; snap them so
    // one-sided limits pick the intended segment.
    let nearest = s.round();
    if (s - nearest).abs() <= 8.0 * f64::EPSILON * nearest.max(1.0) {
        s = nearest;
    }
    let k = s.floor();
    if side == Side::Left && k > 0.0 && s == k {
        return ((k as usize - 1).min(3), 1.0);
    }
    let k = (k.max(0.0) as usize).min(3);
    (k, (s - k as f64).clamp(0.0, 1.0))
}

/// Uncorrected waveform and its time derivatives at one instant.
#[derive(Debug, Clone, Copy)]
struct Ramp {
    rabi: f64,
    rabi_rate: f64,
    sa_detuning: f64,
    sa_detuning_rate: f64,
}

impl Ramp {
    fn at(spec: &GateSpec, k: usize, u: f64) -> Self {
        let sigma = spec.orientation(k);
        let (s, c) = (PI * u).sin_cos();
        let w = PI / spec.tau;
        Ramp {
            rabi: spec.omega_0 * (1.0 - sigma * c),
            rabi_rate: spec.omega_0 * sigma * w * s,
            sa_detuning: spec.delta_0 * (c + sigma),
            sa_detuning_rate: -spec.delta_0 * w * s,
        }
    }

    /// `Ω_C` in MHz: the field-direction angular velocity divided by 2π.
    fn correction(&self) -> f64 {
        let den = self.rabi * self.rabi + self.sa_detuning * self.sa_detuning;
        if den == 0.0 {
            return 0.0;
        }
        (self.rabi_rate * self.sa_detuning - self.rabi * self.sa_detuning_rate) / (TWO_PI * den)
    }
}

/// sin(x)/x, with a series near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

fn drive_detuning_at(spec: &GateSpec, k: usize, u: f64) -> f64 {
    let sigma = spec.orientation(k);
    if k == 0 {
        // Removable singularity at t = 0: the limit is Δ_S(0).
        return spec.delta_0 * (sinc(PI * u) + sigma);
    }
    let completed: f64 = (0..k).map(|j| spec.orientation(j)).sum();
    let integral = completed + (PI * u).sin() / PI + sigma * u;
    spec.delta_0 * integral / (k as f64 + u)
}

/// Ω_R(t) in MHz.
pub fn rabi_envelope(t: f64, spec: &GateSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_time(t)?;
    let (k, u) = locate(t, spec.tau, Side::Right);
    Ok(Ramp::at(spec, k, u).rabi)
}

/// Δ_S(t) = Δ(t) + Δ̇(t)·t in MHz.
pub fn superadiabatic_detuning(t: f64, spec: &GateSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_time(t)?;
    let (k, u) = locate(t, spec.tau, Side::Right);
    Ok(Ramp::at(spec, k, u).sa_detuning)
}

/// Δ(t) = (1/t)∫₀ᵗ Δ_S, from the closed-form antiderivative.
pub fn drive_detuning(t: f64, spec: &GateSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_time(t)?;
    let (k, u) = locate(t, spec.tau, Side::Right);
    Ok(drive_detuning_at(spec, k, u))
}

/// Ω_C(t) in MHz.
pub fn corrected_rabi(t: f64, spec: &GateSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_time(t)?;
    let (k, u) = locate(t, spec.tau, Side::Right);
    Ok(Ramp::at(spec, k, u).correction())
}

/// Ω_S(t) in MHz.
pub fn superadiabatic_rabi(t: f64, spec: &GateSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_time(t)?;
    let (k, u) = locate(t, spec.tau, Side::Right);
    let r = Ramp::at(spec, k, u);
    Ok(r.rabi.hypot(r.correction()))
}

/// φ_S(t) = atan2(Ω_C, Ω_R), zero where both vanish.
pub fn superadiabatic_phase(t: f64, spec: &GateSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_time(t)?;
    let (k, u) = locate(t, spec.tau, Side::Right);
    let r = Ramp::at(spec, k, u);
    Ok(r.correction().atan2(r.rabi))
}

fn phase_offset_at(spec: &GateSpec, k: usize) -> f64 {
    let first = match spec.family {
        GateFamily::Phase => k < 2,
        GateFamily::Flip => k == 0 || k == 3,
    };
    if first {
        spec.phase_offset_1
    } else {
        spec.phase_offset_2
    }
}

/// φ̃(t) + φ_S(t), excluding the global axis phase.
pub fn phase_program(t: f64, spec: &GateSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_time(t)?;
    let (k, u) = locate(t, spec.tau, Side::Right);
    let r = Ramp::at(spec, k, u);
    Ok(phase_offset_at(spec, k) + r.correction().atan2(r.rabi))
}

/// Maximum of Ω_S over a grid of `points_per_segment + 1` samples per
/// segment (both one-sided limits at each boundary).
pub fn max_superadiabatic_rabi(
    family: GateFamily,
    omega_0: f64,
    delta_0: f64,
    tau: f64,
    points_per_segment: usize,
) -> Result<f64> {
    let spec = GateSpec::phase_gate(PI / 2.0).with_drive(omega_0, delta_0, tau);
    let spec = GateSpec { family, ..spec };
    spec.validate()?;
    let n = points_per_segment.max(1);
    let mut best = 0.0_f64;
    for k in 0..4 {
        for j in 0..=n {
            let r = Ramp::at(&spec, k, j as f64 / n as f64);
            best = best.max(r.rabi.hypot(r.correction()));
        }
    }
    Ok(best)
}

/// `(Ω_R, τ·Ω_C)` on the same grid as [`max_superadiabatic_rabi`].
///
/// Both entries are independent of τ, so for any duration
/// `Ω_S = √(Ω_R² + (τΩ_C)²/τ²)` follows without re-evaluating the waveform.
pub fn superadiabatic_profile(
    family: GateFamily,
    omega_0: f64,
    delta_0: f64,
    points_per_segment: usize,
) -> Result<Vec<(f64, f64)>> {
    let spec = GateSpec { family, ..GateSpec::phase_gate(PI / 2.0).with_drive(omega_0, delta_0, 1.0) };
    spec.validate()?;
    let n = points_per_segment.max(1);
    let mut out = Vec::with_capacity(4 * (n + 1));
    for k in 0..4 {
        for j in 0..=n {
            let r = Ramp::at(&spec, k, j as f64 / n as f64);
            out.push((r.rabi, r.correction()));
        }
    }
    Ok(out)
}

/// Deviation of a played schedule from its nominal waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    /// Constant offset δ added to the detuning (MHz).
    pub detuning_offset: f64,
    /// Multiplier `1 + ε` on the played Rabi amplitude.
    pub amplitude_scale: f64,
    /// Multiplier `1 + η` on the time axis: the waveform is played slower
    /// (or faster) without being recomputed.
    pub time_stretch: f64,
    /// Hard cap on the played amplitude (MHz), applied before scaling.
    pub rabi_clip: Option<f64>,
}

impl Default for Distortion {
    fn default() -> Self {
        Distortion { detuning_offset: 0.0, amplitude_scale: 1.0, time_stretch: 1.0, rabi_clip: None }
    }
}

impl Distortion {
    pub fn is_identity(&self) -> bool {
        *self == Distortion::default()
    }
}

/// Shape of a played control pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Four-segment superadiabatic geometric gate.
    Superadiabatic(GateSpec),
    /// Rectangular resonant pulse.
    Square { rabi: f64, phase: f64, duration: f64 },
    /// Zero-duration rotation about z, realized by shifting the drive phase.
    FrameRotation { angle: f64 },
}

/// Everything the drive does at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub t: f64,
    /// Ω_R (MHz)
    pub rabi: f64,
    /// Ω_C (MHz)
    pub corrected_rabi: f64,
    /// Played Ω_S, after clipping and amplitude error (MHz)
    pub superadiabatic_rabi: f64,
    /// Δ_S plus detuning offset (MHz)
    pub superadiabatic_detuning: f64,
    /// Δ plus detuning offset (MHz)
    pub drive_detuning: f64,
    /// φ_S (rad)
    pub superadiabatic_phase: f64,
    /// Full drive phase φ + φ̃(t) + φ_S(t) (rad)
    pub phase: f64,
}

/// A time-parameterized drive `(Ω_S(t), Δ(t), φ(t))` with its segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSchedule {
    pub shape: PulseShape,
    pub distortion: Distortion,
}

/// Bundles the evaluators of a validated gate specification.
pub fn build_schedule(spec: &GateSpec) -> Result<PulseSchedule> {
    spec.validate()?;
    Ok(PulseSchedule { shape: PulseShape::Superadiabatic(*spec), distortion: Distortion::default() })
}

impl PulseSchedule {
    pub fn square(rabi: f64, phase: f64, duration: f64) -> Result<Self> {
        if !(rabi.is_finite() && phase.is_finite() && duration.is_finite()) || duration < 0.0 {
            return Err(Error::InvalidArgument("square pulse needs finite values, duration >= 0".into()));
        }
        Ok(PulseSchedule {
            shape: PulseShape::Square { rabi, phase, duration },
            distortion: Distortion::default(),
        })
    }

    pub fn frame_rotation(angle: f64) -> Self {
        PulseSchedule { shape: PulseShape::FrameRotation { angle }, distortion: Distortion::default() }
    }

    pub fn with_distortion(mut self, distortion: Distortion) -> Self {
        self.distortion = distortion;
        self
    }

    pub fn with_rabi_clip(mut self, clip: f64) -> Self {
        self.distortion.rabi_clip = Some(clip);
        self
    }

    pub fn spec(&self) -> Option<&GateSpec> {
        match &self.shape {
            PulseShape::Superadiabatic(s) => Some(s),
            _ => None,
        }
    }

    fn nominal_duration(&self) -> f64 {
        match self.shape {
            PulseShape::Superadiabatic(s) => s.total_time(),
            PulseShape::Square { duration, .. } => duration,
            PulseShape::FrameRotation { .. } => 0.0,
        }
    }

    pub fn total_time(&self) -> f64 {
        self.nominal_duration() * self.distortion.time_stretch
    }

    /// Segment boundaries in played time.
    pub fn segment_boundaries(&self) -> Vec<f64> {
        let k = self.distortion.time_stretch;
        match self.shape {
            PulseShape::Superadiabatic(s) => (0..=4).map(|i| i as f64 * s.tau * k).collect(),
            PulseShape::Square { duration, .. } => alloc::vec![0.0, duration * k],
            PulseShape::FrameRotation { .. } => alloc::vec![0.0, 0.0],
        }
    }

    /// Drive at time `t`, right-continuous at segment boundaries.
    pub fn sample(&self, t: f64) -> Result<DriveSample> {
        self.sample_side(t, Side::Right)
    }

    /// Drive at time `t`, left-continuous at segment boundaries.
    pub fn sample_left(&self, t: f64) -> Result<DriveSample> {
        self.sample_side(t, Side::Left)
    }

    fn sample_side(&self, t: f64, side: Side) -> Result<DriveSample> {
        let end = self.total_time();
        if !(t >= 0.0 && t <= end * (1.0 + 1e-12) + 1e-15) {
            return Err(Error::Domain { t, end });
        }
        let d = &self.distortion;
        let nominal_t = t / d.time_stretch;
        let played = |omega_s: f64| {
            let clipped = match d.rabi_clip {
                Some(c) => omega_s.min(c),
                None => omega_s,
            };
            d.amplitude_scale * clipped
        };
        let sample = match self.shape {
            PulseShape::Superadiabatic(spec) => {
                let (k, u) = locate(nominal_t, spec.tau, side);
                let r = Ramp::at(&spec, k, u);
                let omega_c = r.correction();
                let phi_s = omega_c.atan2(r.rabi);
                DriveSample {
                    t,
                    rabi: r.rabi,
                    corrected_rabi: omega_c,
                    superadiabatic_rabi: played(r.rabi.hypot(omega_c)),
                    superadiabatic_detuning: r.sa_detuning + d.detuning_offset,
                    drive_detuning: drive_detuning_at(&spec, k, u) + d.detuning_offset,
                    superadiabatic_phase: phi_s,
                    phase: spec.axis_phase + phase_offset_at(&spec, k) + phi_s,
                }
            }
            PulseShape::Square { rabi, phase, .. } => DriveSample {
                t,
                rabi,
                corrected_rabi: 0.0,
                superadiabatic_rabi: played(rabi),
                superadiabatic_detuning: d.detuning_offset,
                drive_detuning: d.detuning_offset,
                superadiabatic_phase: 0.0,
                phase,
            },
            PulseShape::FrameRotation { .. } => DriveSample {
                t,
                rabi: 0.0,
                corrected_rabi: 0.0,
                superadiabatic_rabi: 0.0,
                superadiabatic_detuning: d.detuning_offset,
                drive_detuning: d.detuning_offset,
                superadiabatic_phase: 0.0,
                phase: 0.0,
            },
        };
        Ok(sample)
    }

    /// Uniform samples over the whole schedule, `n ≥ 2` points.
    pub fn sample_uniform(&self, n: usize) -> Result<Vec<DriveSample>> {
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two samples".into()));
        }
        let end = self.total_time();
        (0..n).map(|i| self.sample(end * i as f64 / (n - 1) as f64)).collect()
    }
}
