//! Rotating-wave Hamiltonian of the qutrit coupled to two resonators, and the
//! classical drive terms used for π pulses.
//!
//! All frequencies are angular (rad/s) with ħ = 1 and `E_g = 0`.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, excitation_diagonal, hermiticity_defect, lift, lowering, number, projector,
    raising, Level, OperatorMatrix, Resonator, Slot, SpaceConfig, Transition, C64,
};

/// Physical parameters of the device, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub omega_ge: f64,
    pub omega_ea: f64,
    pub omega_r1: f64,
    pub omega_r2: f64,
    pub g1_ge: f64,
    pub g1_ea: f64,
    pub g2_ge: f64,
    pub g2_ea: f64,
    pub drive_ge: f64,
    pub drive_ea: f64,
}

impl DeviceParams {
    /// Typical circuit-QED magnitudes: g/2π = 50 MHz, anharmonicity/2π = 500 MHz,
    /// Ω/2π = 25 MHz.
    pub fn representative() -> Self {
        let two_pi = 2.0 * PI;
        let g = two_pi * 50e6;
        DeviceParams {
            omega_ge: two_pi * 5.0e9,
            omega_ea: two_pi * 5.5e9,
            omega_r1: two_pi * 6.0e9,
            omega_r2: two_pi * 6.2e9,
            g1_ge: g,
            g1_ea: g,
            g2_ge: g,
            g2_ea: g,
            drive_ge: two_pi * 25e6,
            drive_ea: two_pi * 25e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_ge", self.omega_ge),
            ("omega_ea", self.omega_ea),
            ("omega_r1", self.omega_r1),
            ("omega_r2", self.omega_r2),
            ("g1_ge", self.g1_ge),
            ("g1_ea", self.g1_ea),
            ("g2_ge", self.g2_ge),
            ("g2_ea", self.g2_ea),
            ("drive_ge", self.drive_ge),
            ("drive_ea", self.drive_ea),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Configuration(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        if self.anharmonicity() == 0.0 {
            return Err(Error::Configuration(
                "qutrit transitions must be distinguishable (omega_ge != omega_ea)".into(),
            ));
        }
        Ok(())
    }

    pub fn anharmonicity(&self) -> f64 {
        self.omega_ea - self.omega_ge
    }

    pub fn transition_frequency(&self, t: Transition) -> f64 {
        match t {
            Transition::Ge => self.omega_ge,
            Transition::Ea => self.omega_ea,
        }
    }

    pub fn level_energy(&self, level: Level) -> f64 {
        match level {
            Level::G => 0.0,
            Level::E => self.omega_ge,
            Level::A => self.omega_ge + self.omega_ea,
        }
    }

    pub fn resonator_frequency(&self, r: Resonator) -> f64 {
        match r {
            Resonator::R1 => self.omega_r1,
            Resonator::R2 => self.omega_r2,
        }
    }

    pub fn coupling(&self, r: Resonator, t: Transition) -> f64 {
        match (r, t) {
            (Resonator::R1, Transition::Ge) => self.g1_ge,
            (Resonator::R1, Transition::Ea) => self.g1_ea,
            (Resonator::R2, Transition::Ge) => self.g2_ge,
            (Resonator::R2, Transition::Ea) => self.g2_ea,
        }
    }

    pub fn drive(&self, t: Transition) -> f64 {
        match t {
            Transition::Ge => self.drive_ge,
            Transition::Ea => self.drive_ea,
        }
    }

    /// Coupling strength used to express detunings as Δ/g.
    pub fn reference_coupling(&self) -> f64 {
        self.g1_ea
    }
}

/// Which qutrit–resonator couplings are active in a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CouplingMask {
    pub r1_ge: bool,
    pub r1_ea: bool,
    pub r2_ge: bool,
    pub r2_ea: bool,
}

impl CouplingMask {
    pub const ALL: CouplingMask = CouplingMask {
        r1_ge: true,
        r1_ea: true,
        r2_ge: true,
        r2_ea: true,
    };

    pub const NONE: CouplingMask = CouplingMask {
        r1_ge: false,
        r1_ea: false,
        r2_ge: false,
        r2_ea: false,
    };

    pub fn only(r: Resonator, t: Transition) -> Self {
        let mut m = CouplingMask::NONE;
        *m.get_mut(r, t) = true;
        m
    }

    pub fn get(&self, r: Resonator, t: Transition) -> bool {
        match (r, t) {
            (Resonator::R1, Transition::Ge) => self.r1_ge,
            (Resonator::R1, Transition::Ea) => self.r1_ea,
            (Resonator::R2, Transition::Ge) => self.r2_ge,
            (Resonator::R2, Transition::Ea) => self.r2_ea,
        }
    }

    fn get_mut(&mut self, r: Resonator, t: Transition) -> &mut bool {
        match (r, t) {
            (Resonator::R1, Transition::Ge) => &mut self.r1_ge,
            (Resonator::R1, Transition::Ea) => &mut self.r1_ea,
            (Resonator::R2, Transition::Ge) => &mut self.r2_ge,
            (Resonator::R2, Transition::Ea) => &mut self.r2_ea,
        }
    }
}

/// Per-segment effective resonator frequencies and active couplings.
///
/// Flux tuning is instantaneous between segments, so one `Tuning` holds for the
/// whole segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub omega_r1: f64,
    pub omega_r2: f64,
    pub couplings: CouplingMask,
}

impl Tuning {
    /// The device's own resonator frequencies with every coupling on.
    pub fn nominal(params: &DeviceParams) -> Self {
        Tuning {
            omega_r1: params.omega_r1,
            omega_r2: params.omega_r2,
            couplings: CouplingMask::ALL,
        }
    }

    pub fn resonator_frequency(&self, r: Resonator) -> f64 {
        match r {
            Resonator::R1 => self.omega_r1,
            Resonator::R2 => self.omega_r2,
        }
    }
}

/// Rotating frame in which a [`SegmentHamiltonian`] is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Frame {
    Lab,
    /// Generated by `omega · N_exc`.
    Excitation {
        omega: f64,
    },
    /// Resonant drive frame; the matrix holds only the drive coupling.
    Drive,
    /// Arbitrary diagonal generator.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentHamiltonian {
    pub matrix: OperatorMatrix,
    pub frame: Frame,
}

impl SegmentHamiltonian {
    fn checked(matrix: OperatorMatrix, frame: Frame) -> Result<Self> {
        check_hermitian(&matrix)?;
        Ok(SegmentHamiltonian { matrix, frame })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real diagonal of the matrix.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Adds another Hamiltonian term expressed in the same frame.
    pub fn plus(mut self, other: &SegmentHamiltonian) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        self.matrix += &other.matrix;
        check_hermitian(&self.matrix)?;
        Ok(self)
    }
}

/// Hermiticity guard, tolerance 1e-12 relative to the largest entry.
pub fn check_hermitian(m: &OperatorMatrix) -> Result<()> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = hermiticity_defect(m);
    if defect > 1e-12 * scale {
        return Err(Error::Integrity(format!(
            "Hamiltonian is not Hermitian (defect {defect:e}, scale {scale:e})"
        )));
    }
    Ok(())
}

/// Free part `Σ_l E_l |l⟩⟨l| + Σ_i ω_i a_i†a_i` as a diagonal.
pub fn free_diagonal(params: &DeviceParams, tuning: &Tuning, cfg: SpaceConfig) -> Vec<f64> {
    cfg.labels()
        .map(|l| {
            params.level_energy(l.level)
                + l.n1 as f64 * tuning.omega_r1
                + l.n2 as f64 * tuning.omega_r2
        })
        .collect()
}

pub fn diagonal_matrix(diag: &[f64]) -> OperatorMatrix {
    OperatorMatrix::from_diagonal(&DVector::from_iterator(
        diag.len(),
        diag.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

/// Jaynes–Cummings exchange `a†σ⁻ + aσ⁺` between one resonator and one transition.
pub fn exchange_term(r: Resonator, t: Transition, cfg: SpaceConfig) -> Result<OperatorMatrix> {
    let a = lift(&annihilation(cfg.modes(r))?, r.slot(), cfg)?;
    let sm = lift(&lowering(t), Slot::Qutrit, cfg)?;
    let sp = lift(&raising(t), Slot::Qutrit, cfg)?;
    Ok(a.adjoint() * sm + a * sp)
}

/// The full rotating-wave Hamiltonian in the lab frame for one segment's tuning.
pub fn build_static(
    params: &DeviceParams,
    tuning: &Tuning,
    cfg: SpaceConfig,
) -> Result<SegmentHamiltonian> {
    let mut h = OperatorMatrix::zeros(cfg.dim(), cfg.dim());
    for level in Level::ALL {
        let e = params.level_energy(level);
        if e != 0.0 {
            h += lift(&projector(level), Slot::Qutrit, cfg)? * C64::new(e, 0.0);
        }
    }
    for r in Resonator::BOTH {
        let n = lift(&number(cfg.modes(r))?, r.slot(), cfg)?;
        h += n * C64::new(tuning.resonator_frequency(r), 0.0);
        for t in [Transition::Ge, Transition::Ea] {
            if tuning.couplings.get(r, t) {
                h += exchange_term(r, t, cfg)? * C64::new(params.coupling(r, t), 0.0);
            }
        }
    }
    SegmentHamiltonian::checked(h, Frame::Lab)
}

/// Resonant classical drive `(Ω/2)(e^{−iφ}σ⁺ + e^{iφ}σ⁻)` in the drive frame.
///
/// A pulse of duration `π/Ω` maps the lower level to `−i e^{−iφ}` times the upper one.
pub fn build_drive(
    transition: Transition,
    amplitude: f64,
    phase: f64,
    cfg: SpaceConfig,
) -> Result<SegmentHamiltonian> {
    if !amplitude.is_finite() || !phase.is_finite() {
        return Err(Error::Configuration(format!(
            "drive amplitude and phase must be finite, got {amplitude}, {phase}"
        )));
    }
    let half = 0.5 * amplitude;
    let sp = raising(transition) * C64::from_polar(half, -phase);
    let sm = lowering(transition) * C64::from_polar(half, phase);
    let h = lift(&(sp + sm), Slot::Qutrit, cfg)?;
    SegmentHamiltonian::checked(h, Frame::Drive)
}

/// Same as [`build_drive`] but addressed by level pair, rejecting `g↔a`.
pub fn build_drive_between(
    a: Level,
    b: Level,
    amplitude: f64,
    phase: f64,
    cfg: SpaceConfig,
) -> Result<SegmentHamiltonian> {
    build_drive(Transition::between(a, b)?, amplitude, phase, cfg)
}

/// `H' = R H R† − G` with `R = exp(iG t0)` for a diagonal generator `G`.
pub fn to_rotating_frame(
    h: &SegmentHamiltonian,
    generator: &OperatorMatrix,
    t0: f64,
) -> Result<SegmentHamiltonian> {
    let n = h.dim();
    if generator.nrows() != n || generator.ncols() != n {
        return Err(Error::Shape {
            expected: n,
            got: generator.nrows(),
        });
    }
    let scale = generator.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            let z = generator[(i, j)];
            if i != j && z.norm() > 1e-14 * scale {
                return Err(Error::UnsupportedFrame(format!(
                    "generator has off-diagonal entry ({i},{j}) = {z}"
                )));
            }
            if i == j && z.im.abs() > 1e-14 * scale {
                return Err(Error::UnsupportedFrame(format!(
                    "generator diagonal entry {i} is not real: {z}"
                )));
            }
        }
    }
    let g: Vec<f64> = (0..n).map(|i| generator[(i, i)].re).collect();
    let mut out = h.matrix.clone();
    if t0 != 0.0 {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out[(i, j)] *= C64::from_polar(1.0, (g[i] - g[j]) * t0);
                }
            }
        }
    }
    for i in 0..n {
        out[(i, i)] -= C64::new(g[i], 0.0);
    }
    SegmentHamiltonian::checked(out, Frame::Diagonal)
}

/// Moves a lab-frame Hamiltonian into the frame generated by `omega · N_exc`.
///
/// `N_exc` commutes with every exchange term, so the result is time independent
/// whenever the input is.
pub fn to_excitation_frame(
    h: &SegmentHamiltonian,
    omega: f64,
    cfg: SpaceConfig,
) -> Result<SegmentHamiltonian> {
    let gen: Vec<f64> = excitation_diagonal(cfg).iter().map(|n| n * omega).collect();
    let mut out = to_rotating_frame(h, &diagonal_matrix(&gen), 0.0)?;
    out.frame = Frame::Excitation { omega };
    Ok(out)
}
