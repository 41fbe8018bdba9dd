//! Command-line front end: `run` writes artifacts, `verify` checks the
//! configured protocol against the oracle and conservation laws.

pub mod config;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::pipeline::{run_pipeline, verify as check, VerifyOutcome};
use crate::sweep::{map_entries, Execution};
use config::{Job, Overrides, Plan};
use output::IndexRow;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Physics(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Physics(_) => EXIT_PHYSICS,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Physics(m) => write!(f, "physics check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn physics(job: &Job, e: &Error) -> CliError {
    CliError::Physics(format!("{}: {e}", job.name))
}

/// Reads, parses and validates the config; no files are created.
pub fn load_plan(path: &Path, ov: &Overrides) -> Result<Plan, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg =
        config::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.plan(ov).map_err(CliError::Config)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rows: Vec<IndexRow>,
}

/// Executes every job and writes its artifacts. Sweep entries go to
/// `<dir>/<entry>/`; a single run writes straight into `<dir>`.
pub fn run(plan: &Plan) -> Result<RunSummary, CliError> {
    let results = map_entries(&plan.jobs, Execution::Parallel, |job| run_job(plan, job));
    let mut rows = Vec::with_capacity(results.len());
    let mut first_failure = None;
    for (job, res) in plan.jobs.iter().zip(results) {
        let (final_fidelity, error) = match res {
            Ok(f) => (Some(f), None),
            Err(e) => {
                let msg = e.to_string();
                if first_failure.is_none() {
                    first_failure = Some(e);
                }
                (None, Some(msg))
            }
        };
        rows.push(IndexRow {
            name: job.name.clone(),
            n: job.spec.n(),
            m: job.spec.m(),
            mode: job.run.mode.name(),
            delta_over_g: job.delta_over_g,
            final_fidelity,
            error,
        });
    }
    if plan.is_sweep {
        std::fs::create_dir_all(&plan.out_dir).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(
            plan.out_dir.join(output::INDEX_FILE),
            output::index_document(&rows),
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    match first_failure {
        Some(e) => Err(e),
        None => Ok(RunSummary {
            out_dir: plan.out_dir.clone(),
            rows,
        }),
    }
}

fn entry_dir(plan: &Plan, job: &Job) -> PathBuf {
    if plan.is_sweep {
        plan.out_dir.join(&job.name)
    } else {
        plan.out_dir.clone()
    }
}

fn run_job(plan: &Plan, job: &Job) -> Result<f64, CliError> {
    let out = run_pipeline(job.spec, &job.params, &job.run, &job.options)
        .map_err(|e| physics(job, &e))?;
    let verdict = check(&out);
    output::write_run(&entry_dir(plan, job), job, &out, &verdict)
        .map_err(|e| CliError::Io(e.to_string()))?;
    let r = &out.report;
    if r.max_norm_drift >= crate::pipeline::NORM_TOLERANCE {
        return Err(CliError::Physics(format!(
            "{}: norm drift {:.3e}",
            job.name, r.max_norm_drift
        )));
    }
    if r.max_swap_excitation_drift >= crate::pipeline::EXCITATION_TOLERANCE {
        return Err(CliError::Physics(format!(
            "{}: excitation number drifts by {:.3e} inside a swap",
            job.name, r.max_swap_excitation_drift
        )));
    }
    Ok(r.final_fidelity)
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub job: String,
    pub outcome: VerifyOutcome,
}

/// Runs each job and applies the oracle and conservation checks; writes nothing.
pub fn verify(plan: &Plan) -> Result<Vec<VerifyReport>, CliError> {
    let results = map_entries(&plan.jobs, Execution::Parallel, |job| {
        run_pipeline(job.spec, &job.params, &job.run, &job.options)
            .map(|out| VerifyReport {
                job: job.name.clone(),
                outcome: check(&out),
            })
            .map_err(|e| physics(job, &e))
    });
    results.into_iter().collect()
}

/// Per-boundary deviation table.
pub fn format_table(report: &VerifyReport) -> String {
    let mut s = format!(
        "{}\n{:>5}  {:<22} {:>14} {:>14}  {}\n",
        report.job, "k", "stage", "deviation", "guard_pop", "status"
    );
    for row in &report.outcome.rows {
        s.push_str(&format!(
            "{:>5}  {:<22} {:>14.3e} {:>14.3e}  {}\n",
            row.index,
            row.stage,
            row.deviation,
            row.guard_population,
            if row.pass { "ok" } else { "FAIL" }
        ));
    }
    s
}
