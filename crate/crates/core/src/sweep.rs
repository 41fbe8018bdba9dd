//! Batch evaluation over (N, M) grids and detuning ratios.
//!
//! Entries are independent pipeline runs. With the `parallel` feature (on by
//! default) they are spread over the rayon pool; without it, or with
//! [`Execution::Sequential`], they run in order on the calling thread. Output
//! order always matches input order.

use crate::dynamics::{Mode, RunConfig};
use crate::error::Result;
use crate::hamiltonian::DeviceParams;
use crate::pipeline::{run_pipeline, PipelineOptions, PipelineOutput};
use crate::protocol::ProtocolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[cfg(feature = "parallel")]
pub fn map_entries<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match exec {
        Execution::Parallel => items.par_iter().map(f).collect(),
        Execution::Sequential => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_entries<T, R, F>(items: &[T], _exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Every `(N, M)` with `1 ≤ N ≤ max_n`, `1 ≤ M ≤ max_m`, row-major in N.
pub fn grid(max_n: usize, max_m: usize) -> Vec<ProtocolSpec> {
    (1..=max_n)
        .flat_map(|n| (1..=max_m).map(move |m| ProtocolSpec::new(n, m).expect("n, m >= 1")))
        .collect()
}

pub fn sweep_specs(
    specs: &[ProtocolSpec],
    params: &DeviceParams,
    run: &RunConfig,
    exec: Execution,
) -> Vec<Result<PipelineOutput>> {
    map_entries(specs, exec, |spec| {
        run_pipeline(*spec, params, run, &PipelineOptions::default())
    })
}

/// Finite-detuning runs at `Δ = ratio · g` for each ratio.
pub fn sweep_detuning(
    spec: ProtocolSpec,
    params: &DeviceParams,
    base: &RunConfig,
    ratios: &[f64],
    exec: Execution,
) -> Vec<Result<PipelineOutput>> {
    let g = params.reference_coupling();
    map_entries(ratios, exec, |ratio| {
        let run = RunConfig {
            mode: Mode::FiniteDetuning { delta: ratio * g },
            ..*base
        };
        run_pipeline(spec, params, &run, &PipelineOptions::default())
    })
}
