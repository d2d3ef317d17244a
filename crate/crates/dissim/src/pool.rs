//! Worker pool and seeded parallel sampling.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use dissim_core::ensembles::Clifford2Table;
use dissim_core::variance::{sample_rng, VarianceEstimate};

use crate::error::{RunError, RunResult};

pub const THREADS_ENV: &str = "DISSIM_THREADS";

/// Pool sized by `DISSIM_THREADS`, or rayon's default when unset.
pub fn thread_pool() -> RunResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| RunError::config(format!("{THREADS_ENV}={v} is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| RunError::config(format!("thread pool: {e}")))
}

/// f(i, rng_i) for every sample; sample i always sees `sample_rng(seed, i)`,
/// so the output does not depend on the worker count.
pub fn par_samples<T, F>(samples: usize, seed: u64, f: F) -> RunResult<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> RunResult<T> + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|i| f(i, &mut sample_rng(seed, i as u64)))
        .collect()
}

pub fn par_variance<F>(samples: usize, seed: u64, f: F) -> RunResult<VarianceEstimate>
where
    F: Fn(usize, &mut ChaCha8Rng) -> RunResult<f64> + Sync,
{
    let values = par_samples(samples, seed, f)?;
    Ok(VarianceEstimate::from_values(&values, seed)?)
}

/// Uniform angle in [0, 2π) keyed by (seed, sample, key), so the same key
/// gets the same value whatever else is drawn.
pub fn keyed_angle(seed: u64, sample: u64, key: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng.set_word_pos(2 * key as u128);
    rng.random::<f64>() * std::f64::consts::TAU
}

static CLIFFORD2: OnceLock<Arc<Clifford2Table>> = OnceLock::new();

/// Two-qubit Clifford group, generated once per process.
pub fn clifford2() -> Arc<Clifford2Table> {
    CLIFFORD2.get_or_init(|| Arc::new(Clifford2Table::generate())).clone()
}
