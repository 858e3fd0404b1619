//! Trial-level parallelism with deterministic ordering and per-trial RNG
//! streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LabError, LabResult};

/// Overrides the worker-thread count for experiment sweeps.
pub const THREADS_ENV: &str = "MACROREAL_THREADS";

/// Independent generator for trial `stream` of an experiment seeded `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Thread count from the environment, if set.
pub fn env_threads() -> LabResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| LabError::Invalid(format!("{THREADS_ENV}={s:?} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Runs `f` inside a pool of `threads` workers, or the global pool if `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> LabResult<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| LabError::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// `f(0..n)` in parallel; results come back in index order. The first error
/// by index wins, so failures are reported deterministically too.
pub fn map_trials<T: Send>(n: usize, f: impl Fn(usize) -> LabResult<T> + Sync + Send) -> LabResult<Vec<T>> {
    let results: Vec<LabResult<T>> = (0..n).into_par_iter().map(f).collect();
    results.into_iter().collect()
}
