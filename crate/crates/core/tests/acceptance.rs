//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use noonsim::dynamics::{
    cross_validate, initial_state, rk4_segment, segment_hamiltonian, Mode, RunConfig,
    SegmentPropagator,
};
use noonsim::hamiltonian::DeviceParams;
use noonsim::hilbert::{BasisLabel, Level, Resonator, SpaceConfig, StateVector, Transition, C64};
use noonsim::oracle::{noon_target, stage_state};
use noonsim::pipeline::{run_pipeline, verify, PipelineOptions};
use noonsim::protocol::{
    compile, pi_pulse_duration, swap_duration, timing, ProtocolSpec, ScheduleSegment, SegmentKind,
    Stage,
};
use noonsim::sweep::{grid, sweep_detuning, sweep_specs, Execution};
use noonsim::Error;

const ORACLE_EXACT: f64 = 1e-12;
const ORACLE_BUDGET: Duration = Duration::from_secs(1);
const DYNAMICS_DEVIATION: f64 = 1e-9;
const DYNAMICS_FIDELITY: f64 = 1.0 - 1e-9;
const DYNAMICS_BUDGET: Duration = Duration::from_secs(30);
const SWAP_TIME_REL: f64 = 1e-6;
const RK4_DEVIATION: f64 = 1e-8;
const RK4_FINE_DT_G: f64 = 1e-3;
const RK4_COARSE_DT_G: f64 = 0.05;
const RK4_HALVING_RATIO: f64 = 12.0;
const NORM_DRIFT: f64 = 1e-10;
const EXCITATION_DRIFT: f64 = 1e-10;
const GUARD_POPULATION: f64 = 1e-12;
const DETUNING_RATIOS: [f64; 4] = [10.0, 30.0, 100.0, 300.0];
const DETUNING_THRESHOLD: f64 = 0.95;
/// Fidelity at Δ/g = 100 from the first verified run, and its allowed drift.
const DETUNING_ANCHOR: f64 = 0.956660604;
const DETUNING_ANCHOR_TOL: f64 = 1e-4;
const DETUNING_BUDGET: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    outcome(false, format!("error: {e}"))
}

fn specs_1_to_5() -> Vec<ProtocolSpec> {
    grid(5, 5)
}

fn ac1_oracle_exactness() -> Outcome {
    let params = DeviceParams::representative();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for spec in specs_1_to_5() {
        let schedule = match compile(spec, &params) {
            Ok(s) => s,
            Err(e) => return failed(e),
        };
        for (stage, composed) in schedule
            .boundary_stages()
            .into_iter()
            .zip(&schedule.expected_states)
        {
            let closed = match stage_state(stage, spec, schedule.space) {
                Ok(s) => s,
                Err(e) => return failed(e),
            };
            worst = worst.max(closed.max_deviation(composed).unwrap_or(f64::INFINITY));
            checked += 1;
        }
        let target = noon_target(spec, schedule.space).unwrap();
        let last = schedule.expected_states.last().unwrap();
        worst = worst.max(target.max_deviation(last).unwrap_or(f64::INFINITY));
    }
    let elapsed = start.elapsed();

    // Coefficient of |e,0,M−1⟩ just before the phase correction, against the
    // sign-flipped alternative (−1)^(M−1)·i.
    let mut alt_gap = f64::INFINITY;
    for m in 1..=5 {
        let spec = ProtocolSpec::new(1, m).unwrap();
        let schedule = compile(spec, &params).unwrap();
        let pre = &schedule.expected_states[schedule.segments.len() - 1];
        let z = pre.amplitude(BasisLabel::new(Level::E, 0, m - 1)).unwrap();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let alt = C64::new(0.0, -sign / 2f64.sqrt());
        alt_gap = alt_gap.min((z - alt).norm());
    }
    println!(
        "      note: before the phase correction |e,0,M-1> carries (-1)^M i/sqrt2; \
         the alternative (-1)^(M-1) i/sqrt2 is off by {alt_gap:.4} for every M in 1..5"
    );

    outcome(
        worst < ORACLE_EXACT && elapsed < ORACLE_BUDGET,
        format!(
            "{checked} boundary states, max deviation {worst:.2e} (< {ORACLE_EXACT:.0e}), {:.3} s (< {} s)",
            elapsed.as_secs_f64(),
            ORACLE_BUDGET.as_secs()
        ),
    )
}

struct GridRun {
    deviation: f64,
    min_fidelity: f64,
    norm_drift: f64,
    excitation_drift: f64,
    guard: f64,
    elapsed: Duration,
}

fn run_grid() -> Result<GridRun, Error> {
    let params = DeviceParams::representative();
    let start = Instant::now();
    let outputs = sweep_specs(
        &specs_1_to_5(),
        &params,
        &RunConfig::ideal(),
        Execution::Parallel,
    );
    let elapsed = start.elapsed();
    let mut run = GridRun {
        deviation: 0.0,
        min_fidelity: 1.0,
        norm_drift: 0.0,
        excitation_drift: 0.0,
        guard: 0.0,
        elapsed,
    };
    for out in outputs {
        let r = out?.report;
        run.deviation = run.deviation.max(r.max_oracle_deviation());
        run.min_fidelity = run.min_fidelity.min(r.final_fidelity);
        run.norm_drift = run.norm_drift.max(r.max_norm_drift);
        run.excitation_drift = run.excitation_drift.max(r.max_swap_excitation_drift);
        run.guard = run.guard.max(r.max_guard_population);
    }
    Ok(run)
}

fn ac2_dynamics_vs_oracle(grid: &Result<GridRun, Error>) -> Outcome {
    let g = match grid {
        Ok(g) => g,
        Err(e) => return failed(e),
    };
    outcome(
        g.deviation < DYNAMICS_DEVIATION
            && g.min_fidelity >= DYNAMICS_FIDELITY
            && g.elapsed < DYNAMICS_BUDGET,
        format!(
            "25 runs, max boundary deviation {:.2e} (< {DYNAMICS_DEVIATION:.0e}), min final fidelity 1 - {:.2e}, {:.2} s",
            g.deviation,
            1.0 - g.min_fidelity,
            g.elapsed.as_secs_f64()
        ),
    )
}

/// Maximizer of a unimodal `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > rel_tol * 0.5 * (a + b).abs() {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn transfer_time(resonator: Resonator, transition: Transition, n: usize) -> Result<f64, Error> {
    let params = DeviceParams::representative();
    let space = SpaceConfig::new(n + 3, n + 3)?;
    let seg = ScheduleSegment {
        kind: SegmentKind::Swap {
            resonator,
            transition,
            rung: n,
        },
        duration: 0.0,
        reaches: Stage::Initial,
    };
    let h =
        segment_hamiltonian(&seg, &params, Mode::Ideal, space)?.expect("swap has a Hamiltonian");
    let prop = SegmentPropagator::new(&h)?;
    let place = |level: Level, k: usize| match resonator {
        Resonator::R1 => BasisLabel::new(level, k, 0),
        Resonator::R2 => BasisLabel::new(level, 0, k),
    };
    let from = place(transition.upper(), n - 1);
    let to = place(transition.lower(), n);
    let start = StateVector::basis(space, from)?;
    let p = |t: f64| {
        prop.evolve(&start, t)
            .and_then(|s| s.amplitude(to))
            .map_or(0.0, |z| z.norm_sqr())
    };
    // Coarse scan over one vacuum-rung period to bracket the first maximum.
    let horizon = PI / params.coupling(resonator, transition);
    let steps = 400;
    let dt = horizon / steps as f64;
    let mut k = 1;
    while k < steps
        && !(p(k as f64 * dt) >= p((k - 1) as f64 * dt)
            && p(k as f64 * dt) > p((k + 1) as f64 * dt))
    {
        k += 1;
    }
    Ok(golden_max(
        p,
        (k - 1) as f64 * dt,
        (k + 1) as f64 * dt,
        1e-10,
    ))
}

fn ac3_swap_time_law() -> Outcome {
    let params = DeviceParams::representative();
    let mut worst = 0.0f64;
    for (r, t) in [
        (Resonator::R1, Transition::Ea),
        (Resonator::R2, Transition::Ge),
    ] {
        for n in 1..=5 {
            let found = match transfer_time(r, t, n) {
                Ok(x) => x,
                Err(e) => return failed(e),
            };
            let law = swap_duration(params.coupling(r, t), n);
            worst = worst.max((found - law).abs() / law);
        }
    }
    outcome(
        worst < SWAP_TIME_REL,
        format!("n = 1..5 on r1 e<->a and r2 g<->e, max relative error vs pi/(2g sqrt n) {worst:.2e} (< {SWAP_TIME_REL:.0e})"),
    )
}

fn ac4_integrator() -> Outcome {
    let params = DeviceParams::representative();
    let g = params.reference_coupling();
    let spec = ProtocolSpec::new(2, 2).unwrap();
    let schedule = compile(spec, &params).unwrap();
    let init = initial_state(schedule.space).unwrap();
    let fine = match cross_validate(
        &init,
        &schedule,
        &RunConfig::ideal(),
        &params,
        RK4_FINE_DT_G / g,
    ) {
        Ok(d) => d,
        Err(e) => return failed(e),
    };

    // Order check on the first r1 swap, starting from the pumped state.
    let seg = schedule.segments[1];
    let h = segment_hamiltonian(&seg, &params, Mode::Ideal, schedule.space)
        .unwrap()
        .unwrap();
    let start = &schedule.expected_states[1];
    let exact = SegmentPropagator::new(&h)
        .unwrap()
        .evolve(start, seg.duration)
        .unwrap();
    let err = |dt: f64| {
        rk4_segment(start, &h, seg.duration, dt)
            .and_then(|s| s.max_deviation(&exact))
            .unwrap_or(f64::INFINITY)
    };
    let coarse = err(RK4_COARSE_DT_G / g);
    let halved = err(0.5 * RK4_COARSE_DT_G / g);
    let ratio = coarse / halved;
    outcome(
        fine < RK4_DEVIATION && ratio >= RK4_HALVING_RATIO,
        format!(
            "N=M=2 at dt=1e-3/g: max deviation {fine:.2e} (< {RK4_DEVIATION:.0e}); swap segment dt {RK4_COARSE_DT_G}/g -> half: {coarse:.2e} -> {halved:.2e}, ratio {ratio:.1} (>= {RK4_HALVING_RATIO}), order {:.2}",
            ratio.log2()
        ),
    )
}

fn ac5_conservation(grid: &Result<GridRun, Error>) -> Outcome {
    let g = match grid {
        Ok(g) => g,
        Err(e) => return failed(e),
    };
    let params = DeviceParams::representative();
    let finite = run_pipeline(
        ProtocolSpec::new(2, 2).unwrap(),
        &params,
        &RunConfig::finite(100.0 * params.reference_coupling()),
        &PipelineOptions::default(),
    );
    let (fin_norm, fin_exc) = match finite {
        Ok(o) => (o.report.max_norm_drift, o.report.max_swap_excitation_drift),
        Err(e) => return failed(e),
    };
    let norm = g.norm_drift.max(fin_norm);
    let exc = g.excitation_drift.max(fin_exc);
    outcome(
        norm < NORM_DRIFT && exc < EXCITATION_DRIFT && g.guard < GUARD_POPULATION,
        format!(
            "norm drift {norm:.2e} (< {NORM_DRIFT:.0e}), swap N_exc drift {exc:.2e} (< {EXCITATION_DRIFT:.0e}), ideal guard population {:.2e} (< {GUARD_POPULATION:.0e})",
            g.guard
        ),
    )
}

fn ac6_timing() -> Outcome {
    let params = DeviceParams::representative();
    let mut problems = Vec::new();
    for spec in specs_1_to_5() {
        let (n, m) = (spec.n(), spec.m());
        let report = timing(spec, &params).unwrap();
        let drive = |k: usize| {
            (1..=k)
                .map(|j| j as f64 * PI / params.drive_ea)
                .sum::<f64>()
        };
        let swaps = |k: usize, g: f64| {
            (1..=k)
                .map(|j| PI / (2.0 * g * (j as f64).sqrt()))
                .sum::<f64>()
        };
        let literal = drive(n) + swaps(n, params.g1_ea) + drive(m) + swaps(m, params.g2_ea);
        let compiled: f64 = compile(spec, &params)
            .unwrap()
            .segments
            .iter()
            .map(|s| s.duration)
            .sum();
        if report.literal_total != literal {
            problems.push(format!("({n},{m}) literal total"));
        }
        if report.schedule_sum != compiled {
            problems.push(format!("({n},{m}) schedule sum"));
        }
        if report.literal_differs != (n >= 2 || m >= 2) {
            problems.push(format!("({n},{m}) discrepancy flag"));
        }
    }
    let one = timing(ProtocolSpec::new(1, 1).unwrap(), &params).unwrap();
    let closed = 2.0 * (pi_pulse_duration(params.drive_ea) + PI / (2.0 * params.g1_ea));
    let rel = (one.literal_total - closed).abs() / closed;
    if rel > 1e-15 {
        problems.push(format!("N=M=1 closed form off by {rel:.1e}"));
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "25 specs exact; flag set iff max(N,M) >= 2; N=M=1 literal {:.6e} s = 2(pi/Omega + pi/2g)",
                one.literal_total
            )
        } else {
            problems.join(", ")
        },
    )
}

fn ac7_finite_detuning() -> Outcome {
    let params = DeviceParams::representative();
    let start = Instant::now();
    let runs = sweep_detuning(
        ProtocolSpec::new(1, 1).unwrap(),
        &params,
        &RunConfig::ideal(),
        &DETUNING_RATIOS,
        Execution::Parallel,
    );
    let elapsed = start.elapsed();
    let mut fidelities = Vec::new();
    for r in runs {
        match r {
            Ok(o) => fidelities.push(o.report.final_fidelity),
            Err(e) => return failed(e),
        }
    }
    let monotone = fidelities.windows(2).all(|w| w[1] >= w[0]);
    let at_100 = fidelities[2];
    let listed: Vec<String> = DETUNING_RATIOS
        .iter()
        .zip(&fidelities)
        .map(|(r, f)| format!("{r}: {f:.6}"))
        .collect();
    outcome(
        monotone
            && at_100 > DETUNING_THRESHOLD
            && (at_100 - DETUNING_ANCHOR).abs() < DETUNING_ANCHOR_TOL
            && elapsed < DETUNING_BUDGET,
        format!(
            "F(delta/g) {{{}}}, nondecreasing {monotone}, F(100) > {DETUNING_THRESHOLD} and within {DETUNING_ANCHOR_TOL:.0e} of {DETUNING_ANCHOR}, {:.2} s",
            listed.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn ac8_degenerate_paths() -> Outcome {
    let rejects = [(0, 1), (1, 0), (0, 0)]
        .iter()
        .all(|&(n, m)| matches!(ProtocolSpec::new(n, m), Err(Error::Domain(_))));
    let params = DeviceParams::representative();
    let mut verified = Vec::new();
    for (n, m) in [(1, 1), (1, 4), (3, 1)] {
        let ok = run_pipeline(
            ProtocolSpec::new(n, m).unwrap(),
            &params,
            &RunConfig::ideal(),
            &PipelineOptions::default(),
        )
        .map(|o| verify(&o).passed())
        .unwrap_or(false);
        verified.push(ok);
    }
    outcome(
        rejects && verified.iter().all(|&v| v),
        format!("N=0/M=0 rejected with a domain error: {rejects}; (1,1), (1,4), (3,1) verify: {verified:?}"),
    )
}

fn main() -> ExitCode {
    let grid = run_grid();
    let results = [
        ("oracle exactness", ac1_oracle_exactness()),
        ("dynamics matches oracle", ac2_dynamics_vs_oracle(&grid)),
        ("swap-time law", ac3_swap_time_law()),
        ("rk4 cross-check", ac4_integrator()),
        ("conservation", ac5_conservation(&grid)),
        ("timing report", ac6_timing()),
        ("finite detuning", ac7_finite_detuning()),
        ("degenerate paths", ac8_degenerate_paths()),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.pass;
        println!(
            "[AC{}] {:<24} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
