//! Single-qubit quantum process tomography in the Pauli basis
//! `E = {I, σx, σy, σz}`.
//!
//! Four input states (|0⟩, |1⟩, (|0⟩+|1⟩)/√2, (|0⟩+i|1⟩)/√2) are prepared
//! ideally, the process is applied, and each output is read out under three
//! settings: directly, after (π/2)_y and after (π/2)_x. Linear inversion
//! gives the Pauli transfer matrix, which is converted to χ through the Choi
//! matrix.

use core::f64::consts::FRAC_1_SQRT_2;

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::analysis::{bloch_components, readout_pulses, ReadoutSample};
use crate::benchmarking::NoiseModel;
use crate::dynamics::propagate_schedule;
use crate::linalg::{
    clip_negative_eigenvalues4, cmatmul4, frobenius4, hermitian_eigenvalues4, invert4, matmul4, trace4,
    CMatrix4, RMatrix4, CZERO4,
};
use crate::qubit::{QubitState, Unitary2, C64};
use crate::schedule::PulseSchedule;
use crate::{Error, Result};

pub const BASIS_LABELS: [&str; 4] = ["I", "X", "Y", "Z"];

fn basis() -> [Unitary2; 4] {
    [Unitary2::IDENTITY, Unitary2::pauli_x(), Unitary2::pauli_y(), Unitary2::pauli_z()]
}

/// Process matrix `χ` with `E(ρ) = Σ χ_mn E_m ρ E_n†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    pub chi: CMatrix4,
}

impl ProcessMatrix {
    pub fn trace(&self) -> f64 {
        trace4(&self.chi).re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues4(&self.chi)
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.chi[r][c] - self.chi[c][r].conj()).norm());
            }
        }
        worst
    }

    /// ‖Σ χ_mn E_n†E_m − I‖_F
    pub fn trace_preservation_defect(&self) -> f64 {
        let e = basis();
        let mut acc = Unitary2([[C64::new(0.0, 0.0); 2]; 2]);
        for m in 0..4 {
            for n in 0..4 {
                let term = (e[n].adjoint() * e[m]).scale(self.chi[m][n]);
                for r in 0..2 {
                    for c in 0..2 {
                        acc.0[r][c] += term.0[r][c];
                    }
                }
            }
        }
        acc.frobenius_distance(&Unitary2::IDENTITY)
    }

    pub fn distance(&self, other: &ProcessMatrix) -> f64 {
        frobenius4(&self.chi, &other.chi)
    }

    /// Applies the process to a pure input, returning the output Bloch vector.
    pub fn apply_bloch(&self, psi: &QubitState) -> [f64; 3] {
        let e = basis();
        let rho = density(psi);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for m in 0..4 {
            for n in 0..4 {
                let t = e[m] * Unitary2(rho) * e[n].adjoint();
                for r in 0..2 {
                    for c in 0..2 {
                        out[r][c] += self.chi[m][n] * t.0[r][c];
                    }
                }
            }
        }
        [2.0 * out[0][1].re, -2.0 * out[0][1].im, (out[0][0] - out[1][1]).re]
    }
}

fn density(psi: &QubitState) -> [[C64; 2]; 2] {
    let [a, b] = psi.0;
    [[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]]
}

/// The four tomography inputs Ψ₁..Ψ₄.
pub fn qpt_input_states() -> [QubitState; 4] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [
        QubitState::ZERO,
        QubitState::ONE,
        QubitState([s, s]),
        QubitState([s, C64::new(0.0, FRAC_1_SQRT_2)]),
    ]
}

/// Readout applied before the |0⟩-population measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReadoutSetting {
    Direct,
    /// (π/2)_y pulse
    HalfPiY,
    /// (π/2)_x pulse
    HalfPiX,
}

impl ReadoutSetting {
    pub const ALL: [ReadoutSetting; 3] = [ReadoutSetting::Direct, ReadoutSetting::HalfPiY, ReadoutSetting::HalfPiX];

    pub fn name(self) -> &'static str {
        match self {
            ReadoutSetting::Direct => "direct",
            ReadoutSetting::HalfPiY => "half_pi_y",
            ReadoutSetting::HalfPiX => "half_pi_x",
        }
    }

    pub fn probability(self, psi: &QubitState) -> f64 {
        let (rx, ry) = readout_pulses();
        match self {
            ReadoutSetting::Direct => psi.p0(),
            ReadoutSetting::HalfPiY => ry.apply(psi).p0(),
            ReadoutSetting::HalfPiX => rx.apply(psi).p0(),
        }
    }
}

/// One estimated |0⟩ population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    /// 1-based input index (Ψ₁..Ψ₄).
    pub input_index: usize,
    pub setting: ReadoutSetting,
    pub p0: f64,
    /// 0 means the exact Born probability.
    pub shots: u64,
}

/// What is being characterized.
#[derive(Debug, Clone, Copy)]
pub enum ProcessUnderTest<'a> {
    Unitary(Unitary2),
    Schedule(&'a PulseSchedule),
    /// Several schedules played back to back (first element first).
    Sequence(&'a [PulseSchedule]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QptConfig {
    pub shots: u64,
    /// Quasi-static noise realizations averaged per record.
    pub noise_draws: usize,
    pub substeps: usize,
}

impl Default for QptConfig {
    fn default() -> Self {
        QptConfig { shots: 0, noise_draws: 32, substeps: crate::dynamics::DEFAULT_SUBSTEPS }
    }
}

fn realize(process: &ProcessUnderTest<'_>, noise: Option<&crate::schedule::Distortion>, substeps: usize) -> Result<Unitary2> {
    let one = |s: &PulseSchedule| match noise {
        Some(d) if !d.is_identity() => propagate_schedule(&s.with_distortion(*d), substeps),
        _ => propagate_schedule(s, substeps),
    };
    match process {
        ProcessUnderTest::Unitary(u) => Ok(*u),
        ProcessUnderTest::Schedule(s) => one(s),
        ProcessUnderTest::Sequence(list) => {
            let mut u = Unitary2::IDENTITY;
            for s in list.iter() {
                u = one(s)? * u;
            }
            Ok(u)
        }
    }
}

/// Simulates the tomography measurements of a process.
///
/// With a non-trivial noise model, each record averages the Born
/// probability over `noise_draws` quasi-static realizations; the same
/// realizations are used for every record. With `shots > 0` the population
/// is then replaced by a binomial estimate.
pub fn simulate_qpt<R: Rng + ?Sized>(
    process: &ProcessUnderTest<'_>,
    noise: &NoiseModel,
    config: &QptConfig,
    rng: &mut R,
) -> Result<Vec<MeasurementRecord>> {
    noise.validate()?;
    let unitaries: Vec<Unitary2> = if noise.is_deterministic() || matches!(process, ProcessUnderTest::Unitary(_)) {
        let nominal = noise.nominal();
        alloc::vec![realize(process, Some(&nominal), config.substeps)?]
    } else {
        let draws = config.noise_draws.max(1);
        let mut v = Vec::with_capacity(draws);
        for _ in 0..draws {
            let d = noise.sample(rng);
            v.push(realize(process, Some(&d), config.substeps)?);
        }
        v
    };
    let mut records = Vec::with_capacity(12);
    for (i, psi) in qpt_input_states().iter().enumerate() {
        let outputs: Vec<QubitState> = unitaries.iter().map(|u| u.apply(psi)).collect();
        for setting in ReadoutSetting::ALL {
            let p = outputs.iter().map(|o| setting.probability(o)).sum::<f64>() / outputs.len() as f64;
            let p = p.clamp(0.0, 1.0);
            let p0 = if config.shots == 0 {
                p
            } else {
                let dist = Binomial::new(config.shots, p).map_err(|e| Error::InvalidArgument(alloc::format!("{e}")))?;
                dist.sample(rng) as f64 / config.shots as f64
            };
            records.push(MeasurementRecord { input_index: i + 1, setting, p0, shots: config.shots });
        }
    }
    Ok(records)
}

/// Pauli-transfer matrix `R_ij = ½Tr(σ_i E(σ_j))` by linear inversion.
pub fn pauli_transfer_matrix(records: &[MeasurementRecord]) -> Result<RMatrix4> {
    let mut sums = [[0.0_f64; 3]; 4];
    let mut counts = [[0usize; 3]; 4];
    for r in records {
        if !(1..=4).contains(&r.input_index) || !(0.0..=1.0).contains(&r.p0) {
            return Err(Error::InvalidArgument("record out of range".into()));
        }
        let s = ReadoutSetting::ALL.iter().position(|&x| x == r.setting).unwrap_or(0);
        sums[r.input_index - 1][s] += r.p0;
        counts[r.input_index - 1][s] += 1;
    }
    if counts.iter().flatten().any(|&c| c == 0) {
        return Err(Error::Incomplete);
    }
    let mut inputs: RMatrix4 = [[0.0; 4]; 4];
    let mut outputs: RMatrix4 = [[0.0; 4]; 4];
    for (j, psi) in qpt_input_states().iter().enumerate() {
        let b = bloch_components(psi);
        let mean = |s: usize| sums[j][s] / counts[j][s] as f64;
        let readout = ReadoutSample { t: 0.0, p0_direct: mean(0), p0_y: mean(1), p0_x: mean(2) };
        let out = readout.reconstruct();
        inputs[0][j] = 1.0;
        outputs[0][j] = 1.0;
        for k in 0..3 {
            inputs[k + 1][j] = b[k];
            outputs[k + 1][j] = out[k];
        }
    }
    let inv = invert4(&inputs).ok_or(Error::Incomplete)?;
    Ok(matmul4(&outputs, &inv))
}

/// χ from a Pauli-transfer matrix, via the Choi matrix.
pub fn chi_from_ptm(ptm: &RMatrix4) -> ProcessMatrix {
    let e = basis();
    // E(|a⟩⟨b|) = ½ Σ_j (σ_j)_{ba} E(σ_j),  E(σ_j) = Σ_i R_ij σ_i
    let mut choi = CZERO4;
    for a in 0..2 {
        for b in 0..2 {
            let mut img = [[C64::new(0.0, 0.0); 2]; 2];
            for j in 0..4 {
                let w = e[j].0[b][a] * 0.5;
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..4 {
                    let k = w * ptm[i][j];
                    for r in 0..2 {
                        for c in 0..2 {
                            img[r][c] += k * e[i].0[r][c];
                        }
                    }
                }
            }
            for c in 0..2 {
                for d in 0..2 {
                    choi[2 * a + c][2 * b + d] = img[c][d];
                }
            }
        }
    }
    // χ_mn = v_m† Λ v_n / 4 with (v_m)_(a,c) = (E_m)_ca
    let mut v = [[C64::new(0.0, 0.0); 4]; 4];
    for (m, em) in e.iter().enumerate() {
        for a in 0..2 {
            for c in 0..2 {
                v[m][2 * a + c] = em.0[c][a];
            }
        }
    }
    let mut chi = CZERO4;
    for m in 0..4 {
        for n in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..4 {
                for q in 0..4 {
                    acc += v[m][p].conj() * choi[p][q] * v[n][q];
                }
            }
            chi[m][n] = acc * 0.25;
        }
    }
    ProcessMatrix { chi }
}

/// Linear-inversion estimate of χ.
pub fn reconstruct_chi(records: &[MeasurementRecord]) -> Result<ProcessMatrix> {
    Ok(chi_from_ptm(&pauli_transfer_matrix(records)?))
}

/// Projects χ onto the completely-positive cone by clipping negative
/// eigenvalues and restoring unit trace.
pub fn cp_project(chi: &ProcessMatrix) -> ProcessMatrix {
    let clipped = clip_negative_eigenvalues4(&chi.chi);
    let tr = trace4(&clipped).re;
    if tr <= 0.0 {
        return ProcessMatrix { chi: clipped };
    }
    let mut out = clipped;
    for v in out.iter_mut().flatten() {
        *v /= tr;
    }
    ProcessMatrix { chi: out }
}

/// Rank-1 χ of a unitary: `χ = u u†` with `u_m = Tr(E_m U)/2`.
pub fn ideal_chi(target: &Unitary2) -> Result<ProcessMatrix> {
    if !(target.unitarity_defect() < 1e-8) {
        return Err(Error::InvalidArgument("target is not unitary".into()));
    }
    let e = basis();
    let u: Vec<C64> = e.iter().map(|em| (em.adjoint() * *target).trace() * 0.5).collect();
    let mut chi = CZERO4;
    for m in 0..4 {
        for n in 0..4 {
            chi[m][n] = u[m] * u[n].conj();
        }
    }
    Ok(ProcessMatrix { chi })
}

/// Process fidelity `Re Tr(χ_exp χ₀)`, clamped to [0, 1 + 1e-9].
pub fn process_fidelity(chi_exp: &ProcessMatrix, chi_0: &ProcessMatrix) -> f64 {
    trace4(&cmatmul4(&chi_exp.chi, &chi_0.chi)).re.clamp(0.0, 1.0 + 1e-9)
}

/// Fidelity normalized by the fidelity of the identity operation.
pub fn corrected_fidelity(fidelity: f64, identity_fidelity: f64) -> Result<f64> {
    if identity_fidelity == 0.0 {
        return Err(Error::ZeroIdentityFidelity);
    }
    Ok(fidelity / identity_fidelity)
}
