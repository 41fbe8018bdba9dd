//! Compiles `(N, M, DeviceParams)` into the ordered pulse/swap schedule that
//! loads `N` photons into r1 and `M` photons into r2 on the two branches of
//! the qutrit superposition.
//!
//! Segment order:
//!
//! ```text
//! first part,  j = 1..N   : π(e↔a), swap(r1, e↔a, rung j)
//! exchange                : π(g↔e)
//! second part, j = 1..M−1 : π(e↔a), swap(r2, e↔a, rung j)
//! finish                  : phase correction, swap(r2, g↔e, rung M)
//! ```
//!
//! for `2N + 2M + 1` segments in total.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::DeviceParams;
use crate::hilbert::{Resonator, SpaceConfig, StateVector, Transition};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolSpec {
    n: usize,
    m: usize,
}

impl ProtocolSpec {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(Error::Domain(format!(
                "photon targets must be at least 1, got N={n}, M={m}"
            )));
        }
        Ok(ProtocolSpec { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn segment_count(&self) -> usize {
        2 * self.n + 2 * self.m + 1
    }

    pub fn space(&self) -> SpaceConfig {
        SpaceConfig::for_protocol(self.n, self.m)
    }
}

/// Named protocol state reached at a segment boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    /// `(|g⟩ + |e⟩)/√2 ⊗ |0,0⟩`.
    Initial,
    /// After the `j`-th e↔a pulse of the first part.
    R1Pumped { j: usize },
    /// After the `j`-th r1 swap: `j` photons in r1 on the upper branch.
    R1Loaded { j: usize },
    /// After the g↔e pulse that swaps the roles of the two branches.
    BranchesExchanged,
    /// After the `j`-th e↔a pulse of the second part.
    R2Pumped { j: usize },
    /// After the `j`-th r2 e↔a swap.
    R2Loaded { j: usize },
    /// After the diagonal phase correction.
    PhaseCorrected,
    /// NOON state on the resonators with the qutrit in `|g⟩`.
    Noon,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Initial => write!(f, "initial"),
            Stage::R1Pumped { j } => write!(f, "r1_pumped_{j}"),
            Stage::R1Loaded { j } => write!(f, "r1_loaded_{j}"),
            Stage::BranchesExchanged => write!(f, "branches_exchanged"),
            Stage::R2Pumped { j } => write!(f, "r2_pumped_{j}"),
            Stage::R2Loaded { j } => write!(f, "r2_loaded_{j}"),
            Stage::PhaseCorrected => write!(f, "phase_corrected"),
            Stage::Noon => write!(f, "noon"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    DrivePulse {
        transition: Transition,
        amplitude: f64,
        phase: f64,
    },
    Swap {
        resonator: Resonator,
        transition: Transition,
        rung: usize,
    },
    PhaseCorrection {
        theta_g: f64,
        theta_e: f64,
    },
}

impl SegmentKind {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentKind::DrivePulse { .. } => "drive_pulse",
            SegmentKind::Swap { .. } => "swap",
            SegmentKind::PhaseCorrection { .. } => "phase_correction",
        }
    }

    pub fn is_swap(&self) -> bool {
        matches!(self, SegmentKind::Swap { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub kind: SegmentKind,
    /// Seconds; zero only for the instantaneous phase correction.
    pub duration: f64,
    /// Stage reached at the end of this segment.
    pub reaches: Stage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    /// `Σ_{j=1}^{N} jπ/Ω_ea`, as printed for the first part.
    pub t_d: f64,
    /// `Σ_{j=1}^{N} π/(2 g1_ea √j)`.
    pub t_r: f64,
    /// `Σ_{j=1}^{M} jπ/Ω_ea`.
    pub t_d_prime: f64,
    /// `Σ_{j=1}^{M} π/(2 g2_ea √j)`.
    pub t_r_prime: f64,
    /// Sum of the compiled segment durations.
    pub schedule_sum: f64,
    /// `t_d + t_r + t_d' + t_r'` evaluated verbatim.
    pub literal_total: f64,
    /// The verbatim total counts `jπ/Ω` of drive time at step `j`, while the
    /// compiled schedule uses one π pulse per step; the two totals then differ.
    pub literal_differs: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub spec: ProtocolSpec,
    pub space: SpaceConfig,
    pub segments: Vec<ScheduleSegment>,
    /// Ideal states at every boundary, `segments.len() + 1` entries.
    pub expected_states: Vec<StateVector>,
    pub timing: TimingReport,
}

impl Schedule {
    pub fn boundary_stages(&self) -> Vec<Stage> {
        std::iter::once(Stage::Initial)
            .chain(self.segments.iter().map(|s| s.reaches))
            .collect()
    }

    /// Segment start times; the last entry is the total duration.
    pub fn boundary_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(0.0);
        for s in &self.segments {
            t += s.duration;
            out.push(t);
        }
        out
    }
}

pub fn pi_pulse_duration(amplitude: f64) -> f64 {
    PI / amplitude
}

/// Full-transfer time `π/(2g√n)` on rung `n` of a resonant exchange.
pub fn swap_duration(coupling: f64, rung: usize) -> f64 {
    PI / (2.0 * coupling * (rung as f64).sqrt())
}

/// Diagonal phases `(θ_g, θ_e)` that bring the pre-correction branch
/// coefficients `−(−1)^N i` (on `|g,N,0⟩`) and `(−1)^M i` (on `|e,0,M−1⟩`)
/// to `1` and `i`.
pub fn phase_correction_angles(n: usize, m: usize) -> Result<(f64, f64)> {
    ProtocolSpec::new(n, m)?;
    let theta_g = if n.is_multiple_of(2) {
        FRAC_PI_2
    } else {
        -FRAC_PI_2
    };
    let theta_e = if m.is_multiple_of(2) { 0.0 } else { PI };
    Ok((theta_g, theta_e))
}

/// The ordered segment list without expected states or timing.
pub fn plan(spec: ProtocolSpec, params: &DeviceParams) -> Result<Vec<ScheduleSegment>> {
    params.validate()?;
    let (n, m) = (spec.n, spec.m);
    let mut segs = Vec::with_capacity(spec.segment_count());
    let pulse = |t: Transition, reaches: Stage| {
        let amplitude = params.drive(t);
        ScheduleSegment {
            kind: SegmentKind::DrivePulse {
                transition: t,
                amplitude,
                phase: 0.0,
            },
            duration: pi_pulse_duration(amplitude),
            reaches,
        }
    };
    let swap = |r: Resonator, t: Transition, rung: usize, reaches: Stage| ScheduleSegment {
        kind: SegmentKind::Swap {
            resonator: r,
            transition: t,
            rung,
        },
        duration: swap_duration(params.coupling(r, t), rung),
        reaches,
    };

    for j in 1..=n {
        segs.push(pulse(Transition::Ea, Stage::R1Pumped { j }));
        segs.push(swap(
            Resonator::R1,
            Transition::Ea,
            j,
            Stage::R1Loaded { j },
        ));
    }
    segs.push(pulse(Transition::Ge, Stage::BranchesExchanged));
    for j in 1..m {
        segs.push(pulse(Transition::Ea, Stage::R2Pumped { j }));
        segs.push(swap(
            Resonator::R2,
            Transition::Ea,
            j,
            Stage::R2Loaded { j },
        ));
    }
    let (theta_g, theta_e) = phase_correction_angles(n, m)?;
    segs.push(ScheduleSegment {
        kind: SegmentKind::PhaseCorrection { theta_g, theta_e },
        duration: 0.0,
        reaches: Stage::PhaseCorrected,
    });
    segs.push(swap(Resonator::R2, Transition::Ge, m, Stage::Noon));
    debug_assert_eq!(segs.len(), spec.segment_count());
    Ok(segs)
}

pub fn compile(spec: ProtocolSpec, params: &DeviceParams) -> Result<Schedule> {
    compile_in(spec, params, spec.space())
}

/// Compiles into an explicit truncation, which must keep the guard levels.
pub fn compile_in(
    spec: ProtocolSpec,
    params: &DeviceParams,
    space: SpaceConfig,
) -> Result<Schedule> {
    space.check_protocol(spec.n, spec.m)?;
    let segments = plan(spec, params)?;
    let expected_states = oracle::boundary_states(&segments, &oracle::initial_state(space)?)?;
    let timing = timing_for(spec, params, &segments);
    Ok(Schedule {
        spec,
        space,
        segments,
        expected_states,
        timing,
    })
}

pub fn timing(spec: ProtocolSpec, params: &DeviceParams) -> Result<TimingReport> {
    let segments = plan(spec, params)?;
    Ok(timing_for(spec, params, &segments))
}

fn timing_for(
    spec: ProtocolSpec,
    params: &DeviceParams,
    segments: &[ScheduleSegment],
) -> TimingReport {
    let drive_sum = |k: usize| {
        (1..=k)
            .map(|j| j as f64 * PI / params.drive_ea)
            .sum::<f64>()
    };
    let swap_sum = |k: usize, g: f64| (1..=k).map(|j| swap_duration(g, j)).sum::<f64>();
    let t_d = drive_sum(spec.n);
    let t_r = swap_sum(spec.n, params.g1_ea);
    let t_d_prime = drive_sum(spec.m);
    let t_r_prime = swap_sum(spec.m, params.g2_ea);
    let schedule_sum: f64 = segments.iter().map(|s| s.duration).sum();
    let literal_total = t_d + t_r + t_d_prime + t_r_prime;
    TimingReport {
        t_d,
        t_r,
        t_d_prime,
        t_r_prime,
        schedule_sum,
        literal_total,
        literal_differs: (schedule_sum - literal_total).abs() > 1e-12 * literal_total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> DeviceParams {
        DeviceParams::representative()
    }

    fn kinds(n: usize, m: usize) -> Vec<SegmentKind> {
        plan(ProtocolSpec::new(n, m).unwrap(), &params())
            .unwrap()
            .into_iter()
            .map(|s| s.kind)
            .collect()
    }

    #[test]
    fn segment_counts() {
        assert_eq!(kinds(1, 2).len(), 7);
        assert_eq!(kinds(2, 2).len(), 9);
        assert_eq!(kinds(1, 1).len(), 5);
        for n in 1..6 {
            for m in 1..6 {
                assert_eq!(kinds(n, m).len(), 2 * n + 2 * m + 1);
            }
        }
    }

    #[test]
    fn fifth_segment_of_two_two_is_ge_pulse() {
        assert!(matches!(
            kinds(2, 2)[4],
            SegmentKind::DrivePulse {
                transition: Transition::Ge,
                ..
            }
        ));
    }

    #[test]
    fn single_photon_each_layout() {
        let k = kinds(1, 1);
        assert!(matches!(
            k[0],
            SegmentKind::DrivePulse {
                transition: Transition::Ea,
                ..
            }
        ));
        assert!(matches!(
            k[1],
            SegmentKind::Swap {
                resonator: Resonator::R1,
                transition: Transition::Ea,
                rung: 1
            }
        ));
        assert!(matches!(
            k[2],
            SegmentKind::DrivePulse {
                transition: Transition::Ge,
                ..
            }
        ));
        assert!(matches!(k[3], SegmentKind::PhaseCorrection { .. }));
        assert!(matches!(
            k[4],
            SegmentKind::Swap {
                resonator: Resonator::R2,
                transition: Transition::Ge,
                rung: 1
            }
        ));
    }

    #[test]
    fn rejects_zero_targets() {
        assert!(matches!(ProtocolSpec::new(0, 2), Err(Error::Domain(_))));
        assert!(matches!(ProtocolSpec::new(3, 0), Err(Error::Domain(_))));
        assert!(matches!(
            phase_correction_angles(0, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rejects_small_truncation() {
        let spec = ProtocolSpec::new(3, 2).unwrap();
        let space = SpaceConfig::new(4, 4).unwrap();
        assert!(matches!(
            compile_in(spec, &params(), space),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn phase_angles_solve_the_branch_equations() {
        use num_complex::Complex64 as C;
        let i = C::new(0.0, 1.0);
        for n in 1..8 {
            for m in 1..8 {
                let (tg, te) = phase_correction_angles(n, m).unwrap();
                let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                let g_before = -sign(n) * i;
                let e_before = sign(m) * i;
                assert!((C::from_polar(1.0, tg) * g_before - 1.0).norm() < 1e-15);
                assert!((C::from_polar(1.0, te) * e_before - i).norm() < 1e-15);
            }
        }
        // N even → θ_g = π/2.
        assert_eq!(phase_correction_angles(2, 3).unwrap().0, FRAC_PI_2);
    }

    #[test]
    fn swap_durations_follow_rung_law() {
        let p = params();
        for s in plan(ProtocolSpec::new(4, 3).unwrap(), &p).unwrap() {
            if let SegmentKind::Swap {
                resonator,
                transition,
                rung,
            } = s.kind
            {
                let g = p.coupling(resonator, transition);
                assert_eq!(s.duration, PI / (2.0 * g * (rung as f64).sqrt()));
                assert!(s.duration < PI / g);
            }
        }
    }

    #[test]
    fn timing_single_photon_each() {
        let p = params();
        let t = timing(ProtocolSpec::new(1, 1).unwrap(), &p).unwrap();
        let (om, g) = (p.drive_ea, p.g1_ea);
        assert_eq!(
            t.literal_total,
            (PI / om + PI / (2.0 * g)) + (PI / om + PI / (2.0 * g))
        );
        let compiled =
            PI / p.drive_ea + PI / (2.0 * p.g1_ea) + PI / p.drive_ge + PI / (2.0 * p.g2_ge);
        assert!((t.schedule_sum - compiled).abs() <= 1e-15 * compiled);
    }

    #[test]
    fn doubling_coupling_halves_swaps_only() {
        let p = params();
        let mut q = p;
        q.g1_ge *= 2.0;
        q.g1_ea *= 2.0;
        q.g2_ge *= 2.0;
        q.g2_ea *= 2.0;
        let spec = ProtocolSpec::new(3, 2).unwrap();
        for (a, b) in plan(spec, &p).unwrap().iter().zip(plan(spec, &q).unwrap()) {
            match a.kind {
                SegmentKind::Swap { .. } => assert!((a.duration - 2.0 * b.duration).abs() < 1e-22),
                _ => assert_eq!(a.duration, b.duration),
            }
        }
    }

    #[test]
    fn compiled_total_never_exceeds_verbatim_total() {
        let p = params();
        for n in 1..6 {
            for m in 1..6 {
                let t = timing(ProtocolSpec::new(n, m).unwrap(), &p).unwrap();
                assert!(t.schedule_sum <= t.literal_total * (1.0 + 1e-15));
                if n >= 2 {
                    assert!(t.literal_differs);
                }
            }
        }
    }

    #[test]
    fn compile_is_deterministic() {
        let spec = ProtocolSpec::new(3, 4).unwrap();
        assert_eq!(
            compile(spec, &params()).unwrap(),
            compile(spec, &params()).unwrap()
        );
    }
}
