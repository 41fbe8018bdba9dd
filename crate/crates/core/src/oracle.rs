//! Exact ideal gates for each segment kind, and closed-form expressions for
//! every protocol stage.
//!
//! Ideal gates are monomial matrices (each basis vector goes to one basis
//! vector times a phase), so they are unitary by construction. The two sides
//! of this module are deliberately independent: [`boundary_states`] composes
//! gates, while [`stage_state`] writes each stage down from its formula.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::hamiltonian::DeviceParams;
use crate::hilbert::{
    BasisLabel, Level, OperatorMatrix, Resonator, SpaceConfig, StateVector, Transition, C64, I,
    ONE, ZERO,
};
use crate::protocol::{self, ProtocolSpec, ScheduleSegment, SegmentKind, Stage};

/// Largest amplitude tolerated on rungs an ideal swap does not model.
pub const OFF_RUNG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IdealGate {
    pub kind: SegmentKind,
    /// Column `i` maps to row `target[i]` with factor `phase[i]`.
    target: Vec<usize>,
    phase: Vec<C64>,
    /// Basis states the physical resonant coupling would move but this gate
    /// leaves alone; they must be empty when the gate is applied.
    off_rung: Vec<usize>,
}

impl IdealGate {
    fn identity(kind: SegmentKind, cfg: SpaceConfig) -> Self {
        IdealGate {
            kind,
            target: (0..cfg.dim()).collect(),
            phase: vec![ONE; cfg.dim()],
            off_rung: Vec::new(),
        }
    }

    fn exchange(&mut self, x: usize, y: usize, factor: C64) {
        self.target[x] = y;
        self.target[y] = x;
        self.phase[x] = factor;
        self.phase[y] = factor;
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    /// Applies the gate, refusing states with amplitude on unmodelled rungs.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let amps = state.amplitudes();
        if let Some(&bad) = self
            .off_rung
            .iter()
            .find(|&&i| amps[i].norm() >= OFF_RUNG_TOLERANCE)
        {
            let label = state.cfg().label(bad)?;
            return Err(Error::Integrity(format!(
                "ideal {} sees amplitude {:e} on {label}, outside its target rung",
                self.kind.name(),
                amps[bad].norm()
            )));
        }
        let mut out = StateVector::zeros(state.cfg());
        let dst = out.amplitudes_mut();
        for (i, z) in amps.iter().enumerate() {
            dst[self.target[i]] += self.phase[i] * z;
        }
        Ok(out)
    }

    pub fn to_matrix(&self) -> OperatorMatrix {
        let mut m = OperatorMatrix::zeros(self.dim(), self.dim());
        for (i, (&t, &p)) in self.target.iter().zip(&self.phase).enumerate() {
            m[(t, i)] = p;
        }
        m
    }

    /// True when the gate acts as the identity on basis index `i`.
    pub fn fixes(&self, i: usize) -> bool {
        self.target[i] == i && self.phase[i] == ONE
    }
}

/// `|lower⟩ → −i e^{−iφ}|upper⟩`, `|upper⟩ → −i e^{iφ}|lower⟩` on every Fock label.
pub fn ideal_pi_pulse(transition: Transition, phase: f64, cfg: SpaceConfig) -> IdealGate {
    let kind = SegmentKind::DrivePulse {
        transition,
        amplitude: f64::NAN,
        phase,
    };
    let mut gate = IdealGate::identity(kind, cfg);
    for label in cfg.labels().filter(|l| l.level == transition.lower()) {
        let lo = cfg.index(label).expect("enumerated label");
        let hi = cfg
            .index(label.with_level(transition.upper()))
            .expect("same photons");
        gate.target[lo] = hi;
        gate.target[hi] = lo;
        gate.phase[lo] = -I * C64::from_polar(1.0, -phase);
        gate.phase[hi] = -I * C64::from_polar(1.0, phase);
    }
    gate
}

/// Full transfer `|upper, n−1⟩ ↔ −i|lower, n⟩` on rung `n` of one resonator,
/// spectator resonator untouched, every other rung left alone.
pub fn ideal_swap(
    resonator: Resonator,
    transition: Transition,
    rung: usize,
    cfg: SpaceConfig,
) -> Result<IdealGate> {
    let d = cfg.modes(resonator);
    if rung < 1 || rung >= d {
        return Err(Error::Bounds(format!(
            "rung {rung} outside 1..{} for {resonator}",
            d - 1
        )));
    }
    let kind = SegmentKind::Swap {
        resonator,
        transition,
        rung,
    };
    let mut gate = IdealGate::identity(kind, cfg);
    for label in cfg.labels().filter(|l| l.level == transition.upper()) {
        let photons = label.photons(resonator);
        if photons + 1 >= d {
            continue;
        }
        let up = cfg.index(label)?;
        let down = cfg.index(
            label
                .with_level(transition.lower())
                .with_photons(resonator, photons + 1),
        )?;
        if photons + 1 == rung {
            gate.exchange(up, down, -I);
        } else {
            gate.off_rung.push(up);
            gate.off_rung.push(down);
        }
    }
    Ok(gate)
}

/// `diag(e^{iθ_g}, e^{iθ_e}, 1)` on the qutrit.
pub fn ideal_phase_correction(theta_g: f64, theta_e: f64, cfg: SpaceConfig) -> IdealGate {
    let kind = SegmentKind::PhaseCorrection { theta_g, theta_e };
    let mut gate = IdealGate::identity(kind, cfg);
    for (i, label) in cfg.labels().enumerate() {
        gate.phase[i] = match label.level {
            Level::G => C64::from_polar(1.0, theta_g),
            Level::E => C64::from_polar(1.0, theta_e),
            Level::A => ONE,
        };
    }
    gate
}

pub fn gate_for(segment: &ScheduleSegment, cfg: SpaceConfig) -> Result<IdealGate> {
    Ok(match segment.kind {
        SegmentKind::DrivePulse {
            transition, phase, ..
        } => {
            let mut g = ideal_pi_pulse(transition, phase, cfg);
            g.kind = segment.kind;
            g
        }
        SegmentKind::Swap {
            resonator,
            transition,
            rung,
        } => ideal_swap(resonator, transition, rung, cfg)?,
        SegmentKind::PhaseCorrection { theta_g, theta_e } => {
            ideal_phase_correction(theta_g, theta_e, cfg)
        }
    })
}

/// `(|g⟩ + |e⟩)/√2 ⊗ |0,0⟩`.
pub fn initial_state(cfg: SpaceConfig) -> Result<StateVector> {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::superposition(
        cfg,
        &[
            (s, BasisLabel::new(Level::G, 0, 0)),
            (s, BasisLabel::new(Level::E, 0, 0)),
        ],
    )
}

/// Composes the ideal gates of `segments`, returning every boundary state.
pub fn boundary_states(
    segments: &[ScheduleSegment],
    initial: &StateVector,
) -> Result<Vec<StateVector>> {
    let cfg = initial.cfg();
    let mut out = Vec::with_capacity(segments.len() + 1);
    out.push(initial.clone());
    for (k, seg) in segments.iter().enumerate() {
        let gate = gate_for(seg, cfg).map_err(|e| e.at_segment(k))?;
        let next = gate
            .apply(out.last().expect("non-empty"))
            .map_err(|e| e.at_segment(k))?;
        out.push(next);
    }
    Ok(out)
}

/// Ideal state after `k` segments of the compiled protocol.
pub fn expected_state(spec: ProtocolSpec, k: usize) -> Result<StateVector> {
    let segments = protocol::plan(spec, &DeviceParams::representative())?;
    if k > segments.len() {
        return Err(Error::Bounds(format!(
            "boundary {k} outside 0..={}",
            segments.len()
        )));
    }
    let states = boundary_states(&segments[..k], &initial_state(spec.space())?)?;
    Ok(states
        .into_iter()
        .last()
        .expect("at least the initial state"))
}

fn parity(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Closed-form state of a protocol stage, written out term by term.
pub fn stage_state(stage: Stage, spec: ProtocolSpec, cfg: SpaceConfig) -> Result<StateVector> {
    let (n, m) = (spec.n(), spec.m());
    let s = FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re * s, im * s);
    let l = BasisLabel::new;
    let g00 = l(Level::G, 0, 0);
    // Lower branch of the second part: −(−1)^N i |g,N,0⟩.
    let g_branch = (c(0.0, -parity(n)), l(Level::G, n, 0));
    let terms: Vec<(C64, BasisLabel)> = match stage {
        Stage::Initial => vec![(c(1.0, 0.0), g00), (c(1.0, 0.0), l(Level::E, 0, 0))],
        Stage::R1Pumped { j } => {
            check_step(j, n)?;
            // (−1)^{j−1}|e,j−1,0⟩ pumped by −i.
            vec![
                (c(1.0, 0.0), g00),
                (c(0.0, -parity(j - 1)), l(Level::A, j - 1, 0)),
            ]
        }
        Stage::R1Loaded { j } => {
            check_step(j, n)?;
            vec![(c(1.0, 0.0), g00), (c(parity(j), 0.0), l(Level::E, j, 0))]
        }
        Stage::BranchesExchanged => vec![(c(0.0, -1.0), l(Level::E, 0, 0)), g_branch],
        Stage::R2Pumped { j } => {
            check_step(j, m.saturating_sub(1))?;
            vec![(c(parity(j), 0.0), l(Level::A, 0, j - 1)), g_branch]
        }
        Stage::R2Loaded { j } => {
            check_step(j, m.saturating_sub(1))?;
            vec![(c(0.0, -parity(j)), l(Level::E, 0, j)), g_branch]
        }
        Stage::PhaseCorrected => vec![
            (c(0.0, 1.0), l(Level::E, 0, m - 1)),
            (c(1.0, 0.0), l(Level::G, n, 0)),
        ],
        Stage::Noon => vec![
            (c(1.0, 0.0), l(Level::G, n, 0)),
            (c(1.0, 0.0), l(Level::G, 0, m)),
        ],
    };
    StateVector::superposition(cfg, &terms)
}

fn check_step(j: usize, max: usize) -> Result<()> {
    if j < 1 || j > max {
        return Err(Error::Bounds(format!("step {j} outside 1..={max}")));
    }
    Ok(())
}

/// `|g⟩ ⊗ (|N,0⟩ + |0,M⟩)/√2`.
pub fn noon_target(spec: ProtocolSpec, cfg: SpaceConfig) -> Result<StateVector> {
    stage_state(Stage::Noon, spec, cfg)
}

/// Total probability on basis states the ideal gates never populate.
pub fn off_support_population(state: &StateVector, reference: &StateVector) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(reference.amplitudes().iter())
        .filter(|(_, r)| **r == ZERO)
        .map(|(z, _)| z.norm_sqr())
        .sum()
}
