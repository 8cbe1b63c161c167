//! Superadiabatic geometric quantum gates on a driven two-level system.
//!
//! The crate synthesizes the four-segment driving-field waveforms of the
//! superadiabatic geometric gate family, integrates the resulting
//! Schrödinger dynamics, extracts dynamic and geometric phases, and verifies
//! the gates by process tomography and randomized benchmarking.
//!
//! Everything here is `no_std` (with `alloc`): pure numerics with no IO. The
//! `sagqg` companion crate carries file formats and the command line.
//!
//! Units: times in µs, frequencies in MHz (ordinary, not angular), angles in
//! radians. Hamiltonians are built in angular units (rad/µs, ħ = 1), i.e.
//! every frequency `f` enters a matrix element as `2π·f`.

#![no_std]
// `!(x <= tol)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod benchmarking;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod linalg;
pub mod qubit;
pub mod rng;
pub mod schedule;
pub mod tomography;

pub use error::{Error, Result};
pub use qubit::{Hermitian2, QubitState, Unitary2};
pub use schedule::{GateFamily, GateSpec, PulseSchedule};

/// 2π, the conversion factor from ordinary to angular frequency.
pub const TWO_PI: f64 = core::f64::consts::TAU;
