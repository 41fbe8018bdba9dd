//! Report, trajectory and schedule writers.
//!
//! Every float is printed with 12 significant digits so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::config::{Job, TrajectoryFormat};
use crate::analysis::{level_populations, mean_photons, RunReport};
use crate::hilbert::{Resonator, StateVector};
use crate::oracle::noon_target;
use crate::pipeline::{PipelineOutput, VerifyOutcome};
use crate::protocol::{Schedule, SegmentKind};

pub const REPORT_FILE: &str = "report.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SCHEDULE_FILE: &str = "schedule.json";
pub const INDEX_FILE: &str = "sweep_index.json";

/// `x` with 12 significant digits, in exponent form.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.11e}")
}

fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    fmt12(x).parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, v)| (k, round_json(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

fn to_pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("json values serialize");
    s.push('\n');
    s
}

fn units() -> Value {
    json!({
        "time": "s",
        "angular_frequency": "rad/s",
        "phase": "rad",
        "fidelity": "dimensionless, [0, 1]",
        "population": "probability",
        "photon_number": "photons",
    })
}

pub fn report_document(job: &Job, report: &RunReport, verdict: &VerifyOutcome) -> String {
    let space = job.options.space.unwrap_or_else(|| job.spec.space());
    to_pretty(json!({
        "document": "noonsim run report",
        "units": units(),
        "config": {
            "n": job.spec.n(),
            "m": job.spec.m(),
            "mode": job.run.mode.name(),
            "delta_over_g": job.delta_over_g,
            "truncation": { "d1": space.d1(), "d2": space.d2() },
            "sample_points_per_segment": job.run.sample_points_per_segment,
            "norm_tolerance": job.run.norm_tolerance,
        },
        "report": report,
        "max_oracle_deviation": report.max_oracle_deviation(),
        "checks": {
            "passed": verdict.passed(),
            "failures": verdict.failures,
        },
    }))
}

pub fn schedule_document(schedule: &Schedule) -> String {
    let mut start = 0.0;
    let segments: Vec<Value> = schedule
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let end = start + seg.duration;
            let parameters = match seg.kind {
                SegmentKind::DrivePulse {
                    transition,
                    amplitude,
                    phase,
                } => json!({
                    "transition": transition,
                    "amplitude_rad_per_s": amplitude,
                    "phase_rad": phase,
                }),
                SegmentKind::Swap {
                    resonator,
                    transition,
                    rung,
                } => json!({
                    "resonator": resonator,
                    "transition": transition,
                    "rung": rung,
                }),
                SegmentKind::PhaseCorrection { theta_g, theta_e } => json!({
                    "theta_g_rad": theta_g,
                    "theta_e_rad": theta_e,
                }),
            };
            let row = json!({
                "index": i,
                "kind": seg.kind.name(),
                "parameters": parameters,
                "duration_s": seg.duration,
                "start_s": start,
                "end_s": end,
                "expected_stage": seg.reaches.to_string(),
            });
            start = end;
            row
        })
        .collect();
    to_pretty(json!({
        "document": "noonsim schedule",
        "units": units(),
        "n": schedule.spec.n(),
        "m": schedule.spec.m(),
        "truncation": { "d1": schedule.space.d1(), "d2": schedule.space.d2() },
        "initial_stage": crate::protocol::Stage::Initial.to_string(),
        "segments": segments,
        "timing": schedule.timing,
    }))
}

pub fn trajectory_table(
    output: &PipelineOutput,
    format: TrajectoryFormat,
) -> crate::Result<String> {
    let target = noon_target(output.schedule.spec, output.schedule.space)?;
    let rows = output.trajectory.samples.iter().map(|s| (s.time, &s.state));
    let mut out = String::new();
    match format {
        TrajectoryFormat::Populations => {
            out.push_str("time_s,P_g,P_e,P_a,mean_n1,mean_n2,fidelity_to_target\n");
            for (t, st) in rows {
                let [pg, pe, pa] = level_populations(st);
                let f = crate::analysis::fidelity(st, &target)?;
                let cells = [
                    t,
                    pg,
                    pe,
                    pa,
                    mean_photons(st, Resonator::R1),
                    mean_photons(st, Resonator::R2),
                    f,
                ];
                push_row(&mut out, cells.iter().map(|&x| fmt12(x)));
            }
        }
        TrajectoryFormat::Amplitudes => {
            out.push_str("time_s,basis_label,re_amplitude,im_amplitude\n");
            for (t, st) in rows {
                amplitude_rows(&mut out, t, st);
            }
        }
    }
    Ok(out)
}

fn amplitude_rows(out: &mut String, t: f64, st: &StateVector) {
    let ts = fmt12(t);
    for (label, z) in st.iter() {
        let _ = writeln!(out, "{ts},\"{label}\",{},{}", fmt12(z.re), fmt12(z.im));
    }
}

fn push_row(out: &mut String, cells: impl Iterator<Item = String>) {
    let row: Vec<String> = cells.collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Writes the three per-run artifacts into `dir`.
pub fn write_run(
    dir: &Path,
    job: &Job,
    output: &PipelineOutput,
    verdict: &VerifyOutcome,
) -> io::Result<()> {
    let trajectory = trajectory_table(output, job.trajectory)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SCHEDULE_FILE), schedule_document(&output.schedule))?;
    fs::write(dir.join(TRAJECTORY_FILE), trajectory)?;
    fs::write(
        dir.join(REPORT_FILE),
        report_document(job, &output.report, verdict),
    )?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct IndexRow {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub mode: &'static str,
    pub delta_over_g: Option<f64>,
    pub final_fidelity: Option<f64>,
    pub error: Option<String>,
}

pub fn index_document(rows: &[IndexRow]) -> String {
    let entries: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "dir": r.name,
                "n": r.n,
                "m": r.m,
                "mode": r.mode,
                "delta_over_g": r.delta_over_g,
                "final_fidelity": r.final_fidelity,
                "error": r.error,
            })
        })
        .collect();
    to_pretty(json!({
        "document": "noonsim sweep index",
        "units": units(),
        "entries": entries,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }

    #[test]
    fn rounding_walks_nested_values() {
        let v = round_json(json!({"a": [0.1 + 0.2, 1], "b": {"c": 2.0 / 3.0}, "d": "x"}));
        assert_eq!(v["a"][0], json!(0.3));
        assert_eq!(v["a"][1], json!(1));
        assert_eq!(v["b"]["c"], json!(0.666666666667));
        assert_eq!(v["d"], json!("x"));
    }
}
