//! Exact per-segment propagation of the joint state through a compiled
//! schedule, plus a fourth-order Runge–Kutta stepper used only to
//! cross-check the exact propagator.
//!
//! Each segment Hamiltonian `H` is time independent in the frame rotating at
//! `ω_f · N_exc`. The state is tracked in the interaction picture of the
//! segment's free diagonal `D = diag(H)`, re-anchored at every segment start:
//!
//! ```text
//! ψ(t) = e^{iDt} e^{−iHt} ψ(0)
//! ```
//!
//! In ideal mode `[D, H − D] = 0` and this is just `e^{−i(H−D)t}`.

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_drive, build_static, check_hermitian, to_excitation_frame, CouplingMask, DeviceParams,
    SegmentHamiltonian, Tuning,
};
use crate::hilbert::{
    excitation_diagonal, Level, OperatorMatrix, Resonator, SpaceConfig, StateVector, C64,
};
use crate::protocol::{Schedule, ScheduleSegment, SegmentKind};

pub use crate::oracle::initial_state;

/// How literally "large detuning" is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// Detuned couplings are exactly zero and drives are perfectly selective.
    Ideal,
    /// Every coupling stays on; idle resonators sit `delta` (rad/s) above the
    /// highest qutrit transition; drives also hit the other transition.
    FiniteDetuning { delta: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::FiniteDetuning { .. } => "finite_detuning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub sample_points_per_segment: usize,
    pub norm_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Ideal,
            sample_points_per_segment: 32,
            norm_tolerance: 1e-10,
        }
    }
}

impl RunConfig {
    pub fn ideal() -> Self {
        RunConfig::default()
    }

    pub fn finite(delta: f64) -> Self {
        RunConfig {
            mode: Mode::FiniteDetuning { delta },
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_points_per_segment < 1 {
            return Err(Error::Configuration(
                "sample_points_per_segment must be at least 1".into(),
            ));
        }
        if self.norm_tolerance.is_nan() || self.norm_tolerance <= 0.0 {
            return Err(Error::Configuration(
                "norm_tolerance must be positive".into(),
            ));
        }
        if let Mode::FiniteDetuning { delta } = self.mode {
            if !(delta.is_finite() && delta > 0.0) {
                return Err(Error::Configuration(format!(
                    "finite-detuning mode needs a positive detuning, got {delta}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub segment: usize,
    pub state: StateVector,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest `|‖ψ‖ − 1|` over boundaries and samples.
    pub max_norm_drift: f64,
    /// `⟨N_exc⟩` at every sample, in sample order.
    pub excitation: Vec<f64>,
    /// Largest change of `⟨N_exc⟩` inside any swap segment.
    pub max_swap_excitation_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub boundary_states: Vec<StateVector>,
    pub samples: Vec<Sample>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.boundary_states
            .last()
            .expect("at least the initial state")
    }
}

/// Hamiltonian of one propagating segment (drive or swap) in its frame.
pub fn segment_hamiltonian(
    segment: &ScheduleSegment,
    params: &DeviceParams,
    mode: Mode,
    cfg: SpaceConfig,
) -> Result<Option<SegmentHamiltonian>> {
    let parked = |r: Resonator| match mode {
        Mode::Ideal => params.resonator_frequency(r),
        Mode::FiniteDetuning { delta } => params.omega_ge.max(params.omega_ea) + delta,
    };
    let all_or = |ideal: CouplingMask| match mode {
        Mode::Ideal => ideal,
        Mode::FiniteDetuning { .. } => CouplingMask::ALL,
    };
    match segment.kind {
        SegmentKind::PhaseCorrection { .. } => Ok(None),
        SegmentKind::Swap {
            resonator,
            transition,
            ..
        } => {
            let resonant = params.transition_frequency(transition);
            let freq = |r: Resonator| if r == resonator { resonant } else { parked(r) };
            let tuning = Tuning {
                omega_r1: freq(Resonator::R1),
                omega_r2: freq(Resonator::R2),
                couplings: all_or(CouplingMask::only(resonator, transition)),
            };
            let lab = build_static(params, &tuning, cfg)?;
            to_excitation_frame(&lab, resonant, cfg).map(Some)
        }
        SegmentKind::DrivePulse {
            transition,
            amplitude,
            phase,
        } => {
            let tuning = Tuning {
                omega_r1: parked(Resonator::R1),
                omega_r2: parked(Resonator::R2),
                couplings: all_or(CouplingMask::NONE),
            };
            let lab = build_static(params, &tuning, cfg)?;
            let mut h = to_excitation_frame(&lab, params.transition_frequency(transition), cfg)?
                .plus(&build_drive(transition, amplitude, phase, cfg)?)?;
            if let Mode::FiniteDetuning { .. } = mode {
                h = h.plus(&build_drive(transition.other(), amplitude, phase, cfg)?)?;
            }
            Ok(Some(h))
        }
    }
}

/// Spectral form of one segment's interaction-picture evolution.
#[derive(Debug, Clone)]
pub struct SegmentPropagator {
    eigenvectors: OperatorMatrix,
    eigenvalues: DVector<f64>,
    frame: Vec<f64>,
}

impl SegmentPropagator {
    pub fn new(h: &SegmentHamiltonian) -> Result<Self> {
        check_hermitian(&h.matrix)?;
        let frame = h.diagonal();
        let eig = SymmetricEigen::new(h.matrix.clone());
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure(
                "eigendecomposition produced non-finite eigenvalues".into(),
            ));
        }
        Ok(SegmentPropagator {
            eigenvectors: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
            frame,
        })
    }

    /// `e^{iDt} e^{−iHt} ψ`.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        let mut amps = self.evolve_lab(state.amplitudes(), t);
        for (z, d) in amps.iter_mut().zip(&self.frame) {
            *z *= C64::from_polar(1.0, d * t);
        }
        StateVector::from_amplitudes(state.cfg(), amps)
    }

    fn evolve_lab(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coeffs = self.eigenvectors.ad_mul(psi);
        for (c, l) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -l * t);
        }
        &self.eigenvectors * coeffs
    }

    /// Dense `e^{iDt} e^{−iHt}`.
    pub fn matrix(&self, t: f64) -> OperatorMatrix {
        let phases = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues
                .iter()
                .map(|l| C64::from_polar(1.0, -l * t)),
        );
        let mut u = &self.eigenvectors
            * OperatorMatrix::from_diagonal(&phases)
            * self.eigenvectors.adjoint();
        for (i, d) in self.frame.iter().enumerate() {
            let f = C64::from_polar(1.0, d * t);
            u.row_mut(i).iter_mut().for_each(|z| *z *= f);
        }
        u
    }
}

/// Plain `exp(−iHt)` applied to `state`, via Hermitian eigendecomposition.
pub fn propagate_segment(
    state: &StateVector,
    h: &SegmentHamiltonian,
    duration: f64,
) -> Result<StateVector> {
    propagate_segment_with_tolerance(state, h, duration, RunConfig::default().norm_tolerance)
}

pub fn propagate_segment_with_tolerance(
    state: &StateVector,
    h: &SegmentHamiltonian,
    duration: f64,
    norm_tolerance: f64,
) -> Result<StateVector> {
    if state.dim() != h.dim() {
        return Err(Error::Shape {
            expected: h.dim(),
            got: state.dim(),
        });
    }
    let prop = SegmentPropagator::new(h)?;
    let before = state.norm();
    let out =
        StateVector::from_amplitudes(state.cfg(), prop.evolve_lab(state.amplitudes(), duration))?;
    let drift = (out.norm() - before).abs();
    if drift > norm_tolerance {
        return Err(Error::NumericalFailure(format!("norm drift {drift:e}")));
    }
    Ok(out)
}

fn apply_phase_correction(state: &StateVector, theta_g: f64, theta_e: f64) -> Result<StateVector> {
    let fg = C64::from_polar(1.0, theta_g);
    let fe = C64::from_polar(1.0, theta_e);
    let amps = DVector::from_iterator(
        state.dim(),
        state.iter().map(|(label, z)| match label.level {
            Level::G => z * fg,
            Level::E => z * fe,
            Level::A => z,
        }),
    );
    StateVector::from_amplitudes(state.cfg(), amps)
}

fn check_norm(state: &StateVector, tolerance: f64, drift: &mut f64) -> Result<()> {
    let d = (state.norm() - 1.0).abs();
    *drift = drift.max(d);
    if d > tolerance {
        return Err(Error::NumericalFailure(format!(
            "norm drift {d:e} exceeds tolerance {tolerance:e}"
        )));
    }
    Ok(())
}

/// Runs the whole schedule, recording boundary states and intra-segment samples.
pub fn run_schedule(
    initial: &StateVector,
    schedule: &Schedule,
    cfg: &RunConfig,
    params: &DeviceParams,
) -> Result<Trajectory> {
    cfg.validate()?;
    params.validate()?;
    let space = schedule.space;
    if initial.cfg() != space {
        return Err(Error::Shape {
            expected: space.dim(),
            got: initial.dim(),
        });
    }
    let excitation = excitation_diagonal(space);
    let mut diag = Diagnostics::default();
    check_norm(initial, cfg.norm_tolerance, &mut diag.max_norm_drift)?;

    let mut boundary = vec![initial.clone()];
    let mut samples = vec![Sample {
        time: 0.0,
        segment: 0,
        state: initial.clone(),
    }];
    diag.excitation.push(initial.expectation_diag(&excitation));
    let mut t0 = 0.0;

    for (k, seg) in schedule.segments.iter().enumerate() {
        let current = boundary.last().expect("non-empty").clone();
        let mut step = || -> Result<StateVector> {
            match segment_hamiltonian(seg, params, cfg.mode, space)? {
                None => {
                    let SegmentKind::PhaseCorrection { theta_g, theta_e } = seg.kind else {
                        unreachable!("only phase corrections have no Hamiltonian")
                    };
                    let out = apply_phase_correction(&current, theta_g, theta_e)?;
                    samples.push(Sample {
                        time: t0,
                        segment: k,
                        state: out.clone(),
                    });
                    diag.excitation.push(out.expectation_diag(&excitation));
                    Ok(out)
                }
                Some(h) => {
                    let prop = SegmentPropagator::new(&h)?;
                    let start_exc = current.expectation_diag(&excitation);
                    let points = cfg.sample_points_per_segment;
                    let mut last = current.clone();
                    for p in 1..=points {
                        let t = seg.duration * p as f64 / points as f64;
                        let st = prop.evolve(&current, t)?;
                        check_norm(&st, cfg.norm_tolerance, &mut diag.max_norm_drift)?;
                        let exc = st.expectation_diag(&excitation);
                        if seg.kind.is_swap() {
                            diag.max_swap_excitation_drift =
                                diag.max_swap_excitation_drift.max((exc - start_exc).abs());
                        }
                        diag.excitation.push(exc);
                        samples.push(Sample {
                            time: t0 + t,
                            segment: k,
                            state: st.clone(),
                        });
                        last = st;
                    }
                    Ok(last)
                }
            }
        };
        let next = step().map_err(|e| e.at_segment(k))?;
        check_norm(&next, cfg.norm_tolerance, &mut diag.max_norm_drift)
            .map_err(|e| e.at_segment(k))?;
        boundary.push(next);
        t0 += seg.duration;
    }

    Ok(Trajectory {
        boundary_states: boundary,
        samples,
        diagnostics: diag,
    })
}

/// Classical RK4 in the segment's interaction picture:
/// `dψ/dt = −i e^{iDt}(H − D)e^{−iDt} ψ`.
pub fn rk4_segment(
    state: &StateVector,
    h: &SegmentHamiltonian,
    duration: f64,
    dt: f64,
) -> Result<StateVector> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    let d = h.diagonal();
    let mut v = h.matrix.clone();
    for i in 0..v.nrows() {
        v[(i, i)] = C64::new(0.0, 0.0);
    }
    let rhs = |t: f64, psi: &DVector<C64>| -> DVector<C64> {
        let rotated = DVector::from_iterator(
            psi.len(),
            psi.iter()
                .zip(&d)
                .map(|(z, di)| z * C64::from_polar(1.0, -di * t)),
        );
        let hv = &v * rotated;
        DVector::from_iterator(
            psi.len(),
            hv.iter()
                .zip(&d)
                .map(|(z, di)| C64::new(0.0, -1.0) * z * C64::from_polar(1.0, di * t)),
        )
    };

    let steps = (duration / dt).ceil().max(1.0) as usize;
    let h_step = duration / steps as f64;
    let half = C64::new(0.5 * h_step, 0.0);
    let full = C64::new(h_step, 0.0);
    let sixth = C64::new(h_step / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut psi = state.amplitudes().clone();
    let n0 = psi.norm();
    for s in 0..steps {
        let t = s as f64 * h_step;
        let k1 = rhs(t, &psi);
        let k2 = rhs(t + 0.5 * h_step, &(&psi + &k1 * half));
        let k3 = rhs(t + 0.5 * h_step, &(&psi + &k2 * half));
        let k4 = rhs(t + h_step, &(&psi + &k3 * full));
        psi += (k1 + k2 * two + k3 * two + k4) * sixth;
        let drift = (psi.norm() - n0).abs();
        if drift.is_nan() || drift > 1e-6 {
            return Err(Error::StepSize(format!(
                "norm drift {drift:e} after {} of {steps} steps (dt = {h_step:e} s)",
                s + 1
            )));
        }
    }
    StateVector::from_amplitudes(state.cfg(), psi)
}

/// Integrates the schedule with [`rk4_segment`] and returns the largest
/// amplitude deviation from the exact propagator over all boundaries.
pub fn cross_validate(
    initial: &StateVector,
    schedule: &Schedule,
    cfg: &RunConfig,
    params: &DeviceParams,
    dt: f64,
) -> Result<f64> {
    let exact = run_schedule(
        initial,
        schedule,
        &RunConfig {
            sample_points_per_segment: 1,
            ..*cfg
        },
        params,
    )?;
    let mut psi = initial.clone();
    let mut worst = 0.0f64;
    for (k, seg) in schedule.segments.iter().enumerate() {
        psi = match segment_hamiltonian(seg, params, cfg.mode, schedule.space)
            .map_err(|e| e.at_segment(k))?
        {
            None => {
                let SegmentKind::PhaseCorrection { theta_g, theta_e } = seg.kind else {
                    unreachable!("only phase corrections have no Hamiltonian")
                };
                apply_phase_correction(&psi, theta_g, theta_e)?
            }
            Some(h) => rk4_segment(&psi, &h, seg.duration, dt).map_err(|e| e.at_segment(k))?,
        };
        worst = worst.max(psi.max_deviation(&exact.boundary_states[k + 1])?);
    }
    Ok(worst)
}
