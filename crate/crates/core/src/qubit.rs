//! Single-qubit states and operators.
//!
//! Basis order is (|0⟩, |1⟩); the second level is the `m_s = -1` state of
//! the spin, written |−⟩ in some of the literature.

use core::ops::Mul;

use num_complex::Complex64;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pure state of a two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState(pub [C64; 2]);

impl QubitState {
    pub const ZERO: QubitState = QubitState([ONE, ZERO]);
    pub const ONE: QubitState = QubitState([ZERO, ONE]);

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(a0: C64, a1: C64) -> Result<Self> {
        let n = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument("state has zero or non-finite norm".into()));
        }
        Ok(QubitState([a0 / n, a1 / n]))
    }

    /// cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Self {
        QubitState([
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &QubitState) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &QubitState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let p = C64::from_polar(1.0, phase);
        QubitState([self.0[0] * p, self.0[1] * p])
    }

    /// Probability of finding the system in |0⟩.
    pub fn p0(&self) -> f64 {
        self.0[0].norm_sqr()
    }
}

/// 2×2 complex matrix, used for propagators and ideal gates.
///
/// Nothing in the type forces unitarity; [`Unitary2::unitarity_defect`]
/// measures it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [[C64; 2]; 2]);

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn pauli_x() -> Self {
        Unitary2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Unitary2([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Unitary2([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn hadamard() -> Self {
        let s = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Unitary2([[s, s], [s, -s]])
    }

    /// exp(−i θ n·σ / 2) for a unit axis `n`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        let [nx, ny, nz] = axis;
        Unitary2([
            [C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
            [C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Unitary2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn apply(&self, psi: &QubitState) -> QubitState {
        let m = &self.0;
        let a = &psi.0;
        QubitState([m[0][0] * a[0] + m[0][1] * a[1], m[1][0] * a[0] + m[1][1] * a[1]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, k: C64) -> Self {
        let m = &self.0;
        Unitary2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn frobenius_distance(&self, other: &Unitary2) -> f64 {
        let mut acc = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                acc += (self.0[r][c] - other.0[r][c]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// ‖U†U − I‖_F
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).frobenius_distance(&Unitary2::IDENTITY)
    }

    /// Distance to `other` after optimally aligning the global phase.
    pub fn phase_insensitive_distance(&self, other: &Unitary2) -> f64 {
        let overlap = (other.adjoint() * *self).trace();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        self.frobenius_distance(&other.scale(phase))
    }

    /// Average gate fidelity (|Tr(V†U)|² + d)/(d(d+1)) with d = 2.
    pub fn average_gate_fidelity(&self, target: &Unitary2) -> f64 {
        let t = (target.adjoint() * *self).trace().norm_sqr();
        (t + 2.0) / 6.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Unitary2(out)
    }
}

/// 2×2 Hermitian matrix stored by its Pauli coordinates,
/// `H = e·I + x·σx + y·σy + z·σz`, in rad/µs. Hermitian by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hermitian2 {
    pub e: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Hermitian2 {
    pub const ZERO: Hermitian2 = Hermitian2 { e: 0.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Builds `[[d, c], [c*, -d]] + e·I` from diagonal `d` and upper-right `c`.
    pub fn from_entries(e: f64, d: f64, upper_right: C64) -> Self {
        Hermitian2 { e, x: upper_right.re, y: -upper_right.im, z: d }
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.e + self.z, 0.0), C64::new(self.x, -self.y)],
            [C64::new(self.x, self.y), C64::new(self.e - self.z, 0.0)],
        ]
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.e
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let r = self.field_norm();
        [self.e - r, self.e + r]
    }

    /// Length of the traceless part's Pauli vector.
    pub fn field_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn expectation(&self, psi: &QubitState) -> f64 {
        let [x, y, z] = crate::analysis::bloch_components(psi);
        self.e * psi.norm().powi(2) + self.x * x + self.y * y + self.z * z
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// exp(−i H dt), evaluated in closed form.
    pub fn exp_step(&self, dt: f64) -> Unitary2 {
        let r = self.field_norm();
        let global = C64::from_polar(1.0, -self.e * dt);
        if r == 0.0 {
            return Unitary2::IDENTITY.scale(global);
        }
        let (s, c) = (r * dt).sin_cos();
        let k = s / r;
        let (x, y, z) = (self.x * k, self.y * k, self.z * k);
        Unitary2([
            [C64::new(c, -z), C64::new(-y, -x)],
            [C64::new(y, -x), C64::new(c, z)],
        ])
        .scale(global)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn rotation_matches_pauli_at_pi() {
        let rx = Unitary2::rotation([1.0, 0.0, 0.0], PI);
        assert!(rx.phase_insensitive_distance(&Unitary2::pauli_x()) < 1e-12);
        let ry = Unitary2::rotation([0.0, 1.0, 0.0], PI);
        assert!(ry.phase_insensitive_distance(&Unitary2::pauli_y()) < 1e-12);
    }

    #[test]
    fn exp_step_matches_rotation() {
        // H = (ω/2) σx  ⇒ exp(−iHt) = R_x(ωt)
        let h = Hermitian2 { e: 0.0, x: 0.7, y: 0.0, z: 0.0 };
        let u = h.exp_step(1.3);
        let r = Unitary2::rotation([1.0, 0.0, 0.0], 2.0 * 0.7 * 1.3);
        assert!(u.frobenius_distance(&r) < 1e-14);
    }

    #[test]
    fn hermitian_entries_roundtrip() {
        let h = Hermitian2::from_entries(0.0, 0.3, C64::new(0.2, -0.5));
        let m = h.matrix();
        assert_eq!(m[0][1], C64::new(0.2, -0.5));
        assert_eq!(m[1][0], C64::new(0.2, 0.5));
        assert_eq!(m[0][0].re, 0.3);
    }

    #[test]
    fn zero_norm_state_rejected() {
        assert!(QubitState::new(ZERO, ZERO).is_err());
    }
}
