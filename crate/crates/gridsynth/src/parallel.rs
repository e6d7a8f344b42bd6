//! Sample generation across a worker pool. Every sample draws from its own
//! substream, so output does not depend on the worker count.

use gridsynth_core::{generate_sample, ModelParameters, NetworkTopology, SamplerOptions, SyntheticSample, TopologyError};
use rayon::prelude::*;

/// Pool with `jobs` workers; `None` or `Some(0)` uses every available core.
pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()
}

/// Samples `0..n_samples`, returned in index order.
pub fn generate_parallel(
    pool: &rayon::ThreadPool,
    topology: &NetworkTopology,
    params: &ModelParameters,
    opts: SamplerOptions,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<SyntheticSample>, TopologyError> {
    pool.install(|| {
        (0..n_samples)
            .into_par_iter()
            .map(|i| generate_sample(topology, params, opts, seed, i))
            .collect()
    })
}

/// Runs `f` on every sample index in parallel without keeping the samples.
pub fn for_each_sample<E, F>(
    pool: &rayon::ThreadPool,
    topology: &NetworkTopology,
    params: &ModelParameters,
    opts: SamplerOptions,
    n_samples: u64,
    seed: u64,
    f: F,
) -> Result<(), E>
where
    E: From<TopologyError> + Send,
    F: Fn(SyntheticSample) -> Result<(), E> + Sync,
{
    pool.install(|| {
        (0..n_samples)
            .into_par_iter()
            .try_for_each(|i| f(generate_sample(topology, params, opts, seed, i)?))
    })
}
