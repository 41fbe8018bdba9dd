//! End-to-end run: compile, propagate, score against the oracle.

use crate::analysis::{
    self, fidelity, field_fidelity, guard_population, photon_statistics, purity, reduced_state,
    BoundaryScore, ParamsEcho, PhotonDistribution, RunReport, Subsystem,
};
use crate::dynamics::{run_schedule, RunConfig, Trajectory};
use crate::error::Result;
use crate::hamiltonian::DeviceParams;
use crate::hilbert::{Level, SpaceConfig, StateVector};
use crate::oracle::{initial_state, noon_target};
use crate::protocol::{compile_in, ProtocolSpec, Schedule};

/// Tolerances for [`verify`].
pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const NORM_TOLERANCE: f64 = 1e-10;
pub const EXCITATION_TOLERANCE: f64 = 1e-10;
pub const GUARD_TOLERANCE: f64 = 1e-12;

pub const PHASE_CONVENTION: &str = "all drive phases are 0: a pi pulse maps |lower> -> -i|upper> \
and |upper> -> -i|lower>; a full-transfer swap maps |upper,n-1> -> -i|lower,n>";

pub const TIMING_NOTE: &str = "literal_total counts j*pi/Omega of drive time at step j (quadratic \
in N and M); the compiled schedule uses one pi pulse per step, so schedule_sum is smaller whenever \
N >= 2 or M >= 2. Both figures are reported unchanged.";

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub schedule: Schedule,
    pub trajectory: Trajectory,
    pub report: RunReport,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// Truncation override; defaults to two guard levels per mode.
    pub space: Option<SpaceConfig>,
    /// Initial state override; defaults to `(|g⟩ + |e⟩)/√2 ⊗ |0,0⟩`.
    pub initial: Option<StateVector>,
}

pub fn run_pipeline(
    spec: ProtocolSpec,
    params: &DeviceParams,
    run: &RunConfig,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    let space = options.space.unwrap_or_else(|| spec.space());
    let schedule = compile_in(spec, params, space)?;
    let initial = match &options.initial {
        Some(s) => s.clone(),
        None => initial_state(space)?,
    };
    let trajectory = run_schedule(&initial, &schedule, run, params)?;
    let report = build_report(&schedule, &trajectory, params, run)?;
    Ok(PipelineOutput {
        schedule,
        trajectory,
        report,
    })
}

pub fn build_report(
    schedule: &Schedule,
    trajectory: &Trajectory,
    params: &DeviceParams,
    run: &RunConfig,
) -> Result<RunReport> {
    let spec = schedule.spec;
    let (n, m) = (spec.n(), spec.m());
    let final_state = trajectory.final_state();
    let target = noon_target(spec, schedule.space)?;
    let mut per_boundary = Vec::with_capacity(trajectory.boundary_states.len());
    for (k, (stage, (actual, expected))) in schedule
        .boundary_stages()
        .into_iter()
        .zip(
            trajectory
                .boundary_states
                .iter()
                .zip(&schedule.expected_states),
        )
        .enumerate()
    {
        per_boundary.push(BoundaryScore {
            index: k,
            stage: stage.to_string(),
            fidelity_vs_oracle: fidelity(actual, expected)?,
            max_amplitude_deviation: actual.max_deviation(expected)?,
            guard_population: guard_population(actual, n, m),
        });
    }
    let max_guard_population = trajectory
        .samples
        .iter()
        .map(|s| guard_population(&s.state, n, m))
        .chain(per_boundary.iter().map(|b| b.guard_population))
        .fold(0.0, f64::max);
    let qutrit = reduced_state(final_state, Subsystem::Qutrit);
    Ok(RunReport {
        n,
        m,
        mode: run.mode,
        final_fidelity: fidelity(final_state, &target)?,
        field_fidelity: field_fidelity(final_state, spec)?,
        qutrit_purity_final: purity(&qutrit),
        qutrit_ground_population_final: analysis::level_population(final_state, Level::G),
        per_boundary,
        photon_distribution: PhotonDistribution {
            r1: photon_statistics(final_state, crate::hilbert::Resonator::R1),
            r2: photon_statistics(final_state, crate::hilbert::Resonator::R2),
        },
        max_norm_drift: trajectory.diagnostics.max_norm_drift,
        max_swap_excitation_drift: trajectory.diagnostics.max_swap_excitation_drift,
        max_guard_population,
        timing: schedule.timing,
        timing_note: TIMING_NOTE.to_string(),
        phase_convention: PHASE_CONVENTION.to_string(),
        params: ParamsEcho {
            hz_to_rad_per_s: 2.0 * std::f64::consts::PI,
            rad_per_s: *params,
        },
    })
}

#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub index: usize,
    pub stage: String,
    pub deviation: f64,
    pub guard_population: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub rows: Vec<VerifyRow>,
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Oracle-equivalence and conservation checks on a finished run.
pub fn verify(output: &PipelineOutput) -> VerifyOutcome {
    let r = &output.report;
    let rows: Vec<VerifyRow> = r
        .per_boundary
        .iter()
        .map(|b| VerifyRow {
            index: b.index,
            stage: b.stage.clone(),
            deviation: b.max_amplitude_deviation,
            guard_population: b.guard_population,
            pass: b.max_amplitude_deviation < ORACLE_TOLERANCE
                && b.guard_population < GUARD_TOLERANCE,
        })
        .collect();
    let mut failures = Vec::new();
    for row in rows.iter().filter(|r| !r.pass) {
        failures.push(format!(
            "boundary {} ({}): oracle deviation {:.3e}, guard population {:.3e}",
            row.index, row.stage, row.deviation, row.guard_population
        ));
    }
    if r.max_guard_population >= GUARD_TOLERANCE {
        failures.push(format!(
            "truncation: guard-level population {:.3e} reaches the top {} Fock levels",
            r.max_guard_population,
            crate::hilbert::GUARD_LEVELS
        ));
    }
    if r.max_norm_drift >= NORM_TOLERANCE {
        failures.push(format!("norm drift {:.3e}", r.max_norm_drift));
    }
    if r.max_swap_excitation_drift >= EXCITATION_TOLERANCE {
        failures.push(format!(
            "excitation number drifts by {:.3e} inside a swap",
            r.max_swap_excitation_drift
        ));
    }
    VerifyOutcome { rows, failures }
}
