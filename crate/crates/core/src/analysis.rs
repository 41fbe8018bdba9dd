//! Fidelities, reduced states and photon statistics.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::Mode;
use crate::error::{Error, Result};
use crate::hamiltonian::DeviceParams;
use crate::hilbert::{Level, Resonator, StateVector, C64};
use crate::protocol::{ProtocolSpec, TimingReport};

pub type DensityMatrix = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Qutrit,
    R1,
    R2,
    /// Both resonators, `r1 ⊗ r2`.
    Fields,
}

/// `|⟨target|state⟩|²`.
pub fn fidelity(state: &StateVector, target: &StateVector) -> Result<f64> {
    Ok(target.inner(state)?.norm_sqr())
}

/// `⟨target|ρ|target⟩` for a density matrix over the same subsystem.
pub fn mixed_fidelity(rho: &DensityMatrix, target: &nalgebra::DVector<C64>) -> Result<f64> {
    if rho.nrows() != target.len() {
        return Err(Error::Shape {
            expected: rho.nrows(),
            got: target.len(),
        });
    }
    Ok(target.dotc(&(rho * target)).re)
}

/// Partial trace onto `subsystem`.
pub fn reduced_state(state: &StateVector, subsystem: Subsystem) -> DensityMatrix {
    let cfg = state.cfg();
    let (d1, d2) = (cfg.d1(), cfg.d2());
    // (kept index, traced index) for every basis label.
    let split = |level: usize, n1: usize, n2: usize| -> (usize, usize) {
        match subsystem {
            Subsystem::Qutrit => (level, n1 * d2 + n2),
            Subsystem::R1 => (n1, level * d2 + n2),
            Subsystem::R2 => (n2, level * d1 + n1),
            Subsystem::Fields => (n1 * d2 + n2, level),
        }
    };
    let (kept, traced) = match subsystem {
        Subsystem::Qutrit => (3, d1 * d2),
        Subsystem::R1 => (d1, 3 * d2),
        Subsystem::R2 => (d2, 3 * d1),
        Subsystem::Fields => (d1 * d2, 3),
    };
    let mut psi = DMatrix::<C64>::zeros(kept, traced);
    for (label, z) in state.iter() {
        let (k, t) = split(label.level.ordinal(), label.n1, label.n2);
        psi[(k, t)] = z;
    }
    &psi * psi.adjoint()
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    (rho * rho).trace().re
}

/// `P(n)` for the given resonator.
pub fn photon_statistics(state: &StateVector, resonator: Resonator) -> Vec<f64> {
    let mut p = vec![0.0; state.cfg().modes(resonator)];
    for (label, z) in state.iter() {
        p[label.photons(resonator)] += z.norm_sqr();
    }
    p
}

pub fn level_populations(state: &StateVector) -> [f64; 3] {
    let mut p = [0.0; 3];
    for (label, z) in state.iter() {
        p[label.level.ordinal()] += z.norm_sqr();
    }
    p
}

pub fn mean_photons(state: &StateVector, resonator: Resonator) -> f64 {
    state
        .iter()
        .map(|(label, z)| label.photons(resonator) as f64 * z.norm_sqr())
        .sum()
}

/// Population above photon number `n` in r1 or `m` in r2.
pub fn guard_population(state: &StateVector, n: usize, m: usize) -> f64 {
    let cfg = state.cfg();
    state
        .iter()
        .filter(|(label, _)| cfg.is_guard(*label, n, m))
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// Fidelity of the resonator state (qutrit traced out) with the NOON field state.
pub fn field_fidelity(state: &StateVector, spec: ProtocolSpec) -> Result<f64> {
    let cfg = state.cfg();
    let rho = reduced_state(state, Subsystem::Fields);
    let mut target = nalgebra::DVector::<C64>::zeros(cfg.d1() * cfg.d2());
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    if spec.n() >= cfg.d1() || spec.m() >= cfg.d2() {
        return Err(Error::Bounds("NOON target outside truncation".into()));
    }
    target[spec.n() * cfg.d2()] = s;
    target[spec.m()] += s;
    mixed_fidelity(&rho, &target)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhotonDistribution {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryScore {
    pub index: usize,
    pub stage: String,
    pub fidelity_vs_oracle: f64,
    pub max_amplitude_deviation: f64,
    pub guard_population: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    /// Multiply Hz by this to get rad/s.
    pub hz_to_rad_per_s: f64,
    pub rad_per_s: DeviceParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    /// Fidelity with `|g⟩ ⊗ NOON`.
    pub final_fidelity: f64,
    /// Fidelity of the resonator state alone with NOON.
    pub field_fidelity: f64,
    pub qutrit_purity_final: f64,
    pub qutrit_ground_population_final: f64,
    pub per_boundary: Vec<BoundaryScore>,
    pub photon_distribution: PhotonDistribution,
    pub max_norm_drift: f64,
    pub max_swap_excitation_drift: f64,
    pub max_guard_population: f64,
    pub timing: TimingReport,
    pub timing_note: String,
    pub phase_convention: String,
    pub params: ParamsEcho,
}

impl RunReport {
    pub fn max_oracle_deviation(&self) -> f64 {
        self.per_boundary
            .iter()
            .map(|b| b.max_amplitude_deviation)
            .fold(0.0, f64::max)
    }
}

/// Probability of finding the qutrit in `level`.
pub fn level_population(state: &StateVector, level: Level) -> f64 {
    level_populations(state)[level.ordinal()]
}
