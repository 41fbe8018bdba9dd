//! Truncated Hilbert space of one ladder qutrit and two resonator modes.
//!
//! The basis is ordered level-major, then by the photon number of `r1`,
//! then by the photon number of `r2`:
//!
//! ```text
//! index(level, n1, n2) = level · d1 · d2 + n1 · d2 + n2
//! ```
//!
//! Every operator on the full space is the Kronecker product
//! `qutrit ⊗ r1 ⊗ r2` in that order, so this ordering is used everywhere,
//! including the CSV and JSON outputs.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex square matrix over a (sub)space.
pub type OperatorMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Number of guard Fock levels kept above the highest populated level.
pub const GUARD_LEVELS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    G,
    E,
    A,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::A];

    pub fn ordinal(self) -> usize {
        match self {
            Level::G => 0,
            Level::E => 1,
            Level::A => 2,
        }
    }

    pub fn from_ordinal(i: usize) -> Option<Level> {
        Level::ALL.get(i).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            Level::G => 'g',
            Level::E => 'e',
            Level::A => 'a',
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One of the two dipole-allowed transitions of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    Ge,
    Ea,
}

impl Transition {
    pub fn lower(self) -> Level {
        match self {
            Transition::Ge => Level::G,
            Transition::Ea => Level::E,
        }
    }

    pub fn upper(self) -> Level {
        match self {
            Transition::Ge => Level::E,
            Transition::Ea => Level::A,
        }
    }

    /// The other transition of the ladder.
    pub fn other(self) -> Transition {
        match self {
            Transition::Ge => Transition::Ea,
            Transition::Ea => Transition::Ge,
        }
    }

    pub fn between(a: Level, b: Level) -> Result<Transition> {
        match (a, b) {
            (Level::G, Level::E) | (Level::E, Level::G) => Ok(Transition::Ge),
            (Level::E, Level::A) | (Level::A, Level::E) => Ok(Transition::Ea),
            _ => Err(Error::UnsupportedTransition(format!(
                "{a}<->{b} is not a ladder transition"
            ))),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Ge => write!(f, "g<->e"),
            Transition::Ea => write!(f, "e<->a"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resonator {
    R1,
    R2,
}

impl Resonator {
    pub const BOTH: [Resonator; 2] = [Resonator::R1, Resonator::R2];

    pub fn slot(self) -> Slot {
        match self {
            Resonator::R1 => Slot::R1,
            Resonator::R2 => Slot::R2,
        }
    }
}

impl fmt::Display for Resonator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resonator::R1 => write!(f, "r1"),
            Resonator::R2 => write!(f, "r2"),
        }
    }
}

/// Tensor factor of the joint space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Qutrit,
    R1,
    R2,
}

/// Fock truncation of the two resonators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceConfig {
    d1: usize,
    d2: usize,
}

impl SpaceConfig {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 < 2 || d2 < 2 {
            return Err(Error::Configuration(format!(
                "Fock truncation must keep at least 2 levels per mode, got d1={d1}, d2={d2}"
            )));
        }
        Ok(SpaceConfig { d1, d2 })
    }

    /// Smallest truncation holding `n` photons in r1 and `m` in r2 plus the guard levels.
    pub fn for_protocol(n: usize, m: usize) -> Self {
        SpaceConfig {
            d1: (n + 1 + GUARD_LEVELS).max(2),
            d2: (m + 1 + GUARD_LEVELS).max(2),
        }
    }

    /// Rejects truncations with fewer than [`GUARD_LEVELS`] levels above the targets.
    pub fn check_protocol(&self, n: usize, m: usize) -> Result<()> {
        for (name, d, target) in [("d1", self.d1, n), ("d2", self.d2, m)] {
            if d < target + 1 + GUARD_LEVELS {
                return Err(Error::Truncation(format!(
                    "{name} = {d} leaves {} guard level(s) above photon number {target}; need {}",
                    d.saturating_sub(target + 1),
                    GUARD_LEVELS
                )));
            }
        }
        Ok(())
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn modes(&self, r: Resonator) -> usize {
        match r {
            Resonator::R1 => self.d1,
            Resonator::R2 => self.d2,
        }
    }

    pub fn dim(&self) -> usize {
        3 * self.d1 * self.d2
    }

    pub fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Qutrit => 3,
            Slot::R1 => self.d1,
            Slot::R2 => self.d2,
        }
    }

    pub fn index(&self, label: BasisLabel) -> Result<usize> {
        basis_index(label, *self)
    }

    pub fn label(&self, index: usize) -> Result<BasisLabel> {
        basis_label(index, *self)
    }

    /// All labels in index order.
    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        let (d1, d2) = (self.d1, self.d2);
        Level::ALL.into_iter().flat_map(move |level| {
            (0..d1).flat_map(move |n1| (0..d2).map(move |n2| BasisLabel { level, n1, n2 }))
        })
    }

    /// True if the label sits in a guard level of either resonator.
    pub fn is_guard(&self, label: BasisLabel, n: usize, m: usize) -> bool {
        label.n1 > n || label.n2 > m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub level: Level,
    pub n1: usize,
    pub n2: usize,
}

impl BasisLabel {
    pub const fn new(level: Level, n1: usize, n2: usize) -> Self {
        BasisLabel { level, n1, n2 }
    }

    pub fn photons(&self, r: Resonator) -> usize {
        match r {
            Resonator::R1 => self.n1,
            Resonator::R2 => self.n2,
        }
    }

    /// Same label with the photon number of `r` replaced.
    pub fn with_photons(self, r: Resonator, n: usize) -> Self {
        match r {
            Resonator::R1 => BasisLabel { n1: n, ..self },
            Resonator::R2 => BasisLabel { n2: n, ..self },
        }
    }

    pub fn with_level(self, level: Level) -> Self {
        BasisLabel { level, ..self }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}>", self.level, self.n1, self.n2)
    }
}

pub fn basis_index(label: BasisLabel, cfg: SpaceConfig) -> Result<usize> {
    if label.n1 >= cfg.d1 || label.n2 >= cfg.d2 {
        return Err(Error::Bounds(format!(
            "{label} outside truncation d1={}, d2={}",
            cfg.d1, cfg.d2
        )));
    }
    Ok(label.level.ordinal() * cfg.d1 * cfg.d2 + label.n1 * cfg.d2 + label.n2)
}

pub fn basis_label(index: usize, cfg: SpaceConfig) -> Result<BasisLabel> {
    if index >= cfg.dim() {
        return Err(Error::Bounds(format!(
            "index {index} outside dimension {}",
            cfg.dim()
        )));
    }
    let block = cfg.d1 * cfg.d2;
    let level = Level::from_ordinal(index / block).expect("index < 3·block");
    let rest = index % block;
    Ok(BasisLabel {
        level,
        n1: rest / cfg.d2,
        n2: rest % cfg.d2,
    })
}

/// Single-mode annihilation operator `a` on `d` Fock levels.
pub fn annihilation(d: usize) -> Result<OperatorMatrix> {
    if d < 2 {
        return Err(Error::Configuration(format!(
            "a mode needs at least 2 Fock levels, got {d}"
        )));
    }
    let mut a = OperatorMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn creation(d: usize) -> Result<OperatorMatrix> {
    annihilation(d).map(|a| a.adjoint())
}

pub fn number(d: usize) -> Result<OperatorMatrix> {
    if d < 2 {
        return Err(Error::Configuration(format!(
            "a mode needs at least 2 Fock levels, got {d}"
        )));
    }
    Ok(OperatorMatrix::from_diagonal(&DVector::from_fn(
        d,
        |n, _| C64::new(n as f64, 0.0),
    )))
}

/// `|to⟩⟨from|` on the qutrit, restricted to lowering along a ladder transition.
pub fn transition_lowering(from: Level, to: Level) -> Result<OperatorMatrix> {
    match (from, to) {
        (Level::E, Level::G) | (Level::A, Level::E) => {
            let mut s = OperatorMatrix::zeros(3, 3);
            s[(to.ordinal(), from.ordinal())] = ONE;
            Ok(s)
        }
        _ => Err(Error::UnsupportedTransition(format!(
            "{from}->{to} is not a lowering ladder transition"
        ))),
    }
}

pub fn lowering(t: Transition) -> OperatorMatrix {
    transition_lowering(t.upper(), t.lower()).expect("ladder transitions are supported")
}

pub fn raising(t: Transition) -> OperatorMatrix {
    lowering(t).adjoint()
}

pub fn projector(level: Level) -> OperatorMatrix {
    let mut p = OperatorMatrix::zeros(3, 3);
    p[(level.ordinal(), level.ordinal())] = ONE;
    p
}

/// Embeds a single-subsystem operator into the full space.
pub fn lift(op: &OperatorMatrix, slot: Slot, cfg: SpaceConfig) -> Result<OperatorMatrix> {
    let expected = cfg.slot_dim(slot);
    if op.nrows() != expected || op.ncols() != expected {
        return Err(Error::Shape {
            expected,
            got: op.nrows().max(op.ncols()),
        });
    }
    let id_q = OperatorMatrix::identity(3, 3);
    let id_1 = OperatorMatrix::identity(cfg.d1, cfg.d1);
    let id_2 = OperatorMatrix::identity(cfg.d2, cfg.d2);
    Ok(match slot {
        Slot::Qutrit => op.kronecker(&id_1).kronecker(&id_2),
        Slot::R1 => id_q.kronecker(op).kronecker(&id_2),
        Slot::R2 => id_q.kronecker(&id_1).kronecker(op),
    })
}

/// Diagonal of the total excitation number `a1†a1 + a2†a2 + |e⟩⟨e| + 2|a⟩⟨a|`.
pub fn excitation_diagonal(cfg: SpaceConfig) -> Vec<f64> {
    cfg.labels()
        .map(|l| (l.n1 + l.n2 + l.level.ordinal()) as f64)
        .collect()
}

pub fn excitation_operator(cfg: SpaceConfig) -> OperatorMatrix {
    OperatorMatrix::from_diagonal(&DVector::from_iterator(
        cfg.dim(),
        excitation_diagonal(cfg)
            .into_iter()
            .map(|x| C64::new(x, 0.0)),
    ))
}

/// Largest elementwise modulus of `m − m†`.
pub fn hermiticity_defect(m: &OperatorMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest elementwise modulus of `u†u − 1`.
pub fn unitarity_defect(u: &OperatorMatrix) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

/// Pure state of the joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    cfg: SpaceConfig,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn zeros(cfg: SpaceConfig) -> Self {
        StateVector {
            cfg,
            amplitudes: DVector::zeros(cfg.dim()),
        }
    }

    pub fn from_amplitudes(cfg: SpaceConfig, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != cfg.dim() {
            return Err(Error::Shape {
                expected: cfg.dim(),
                got: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NumericalFailure("non-finite amplitude".into()));
        }
        Ok(StateVector { cfg, amplitudes })
    }

    pub fn basis(cfg: SpaceConfig, label: BasisLabel) -> Result<Self> {
        let mut s = StateVector::zeros(cfg);
        s.amplitudes[cfg.index(label)?] = ONE;
        Ok(s)
    }

    /// Builds `Σ c_k |label_k⟩` without normalizing.
    pub fn superposition(cfg: SpaceConfig, terms: &[(C64, BasisLabel)]) -> Result<Self> {
        let mut s = StateVector::zeros(cfg);
        for &(c, label) in terms {
            s.amplitudes[cfg.index(label)?] += c;
        }
        Ok(s)
    }

    pub fn cfg(&self) -> SpaceConfig {
        self.cfg
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, label: BasisLabel) -> Result<C64> {
        Ok(self.amplitudes[self.cfg.index(label)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NumericalFailure(
                "cannot normalize a zero or non-finite state".into(),
            ));
        }
        self.amplitudes /= C64::new(n, 0.0);
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_space(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<StateVector> {
        if op.ncols() != self.dim() || op.nrows() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: op.nrows(),
            });
        }
        Ok(StateVector {
            cfg: self.cfg,
            amplitudes: op * &self.amplitudes,
        })
    }

    /// `⟨self|op|self⟩`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        let applied = self.apply(op)?;
        Ok(self.amplitudes.dotc(&applied.amplitudes))
    }

    /// Expectation of a diagonal observable given by its diagonal entries.
    pub fn expectation_diag(&self, diag: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(diag)
            .map(|(z, d)| z.norm_sqr() * d)
            .sum()
    }

    /// Largest elementwise modulus of the amplitude difference.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn iter(&self) -> impl Iterator<Item = (BasisLabel, C64)> + '_ {
        self.cfg.labels().zip(self.amplitudes.iter().copied())
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    fn check_same_space(&self, other: &StateVector) -> Result<()> {
        if self.cfg != other.cfg {
            return Err(Error::Shape {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}
