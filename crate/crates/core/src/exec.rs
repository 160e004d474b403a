//! Execution strategy for the data-parallel loops.
//!
//! Monte Carlo work is split into fixed-size chunks. Chunk `k` always draws
//! from ChaCha stream `k` of the run seed, and partial results are reduced in
//! chunk order, so results do not depend on the strategy or on the number of
//! worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Number of trials handled by one RNG stream.
pub const CHUNK_TRIALS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, and falls
    /// back to sequential evaluation otherwise.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Runs `f` on each `(chunk_index, trials_in_chunk)` pair covering
    /// `total` trials.
    pub fn map_chunks<T, F>(self, total: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync + Send,
    {
        let n = total.div_ceil(CHUNK_TRIALS) as usize;
        self.map(n, |k| {
            let start = k as u64 * CHUNK_TRIALS;
            let count = CHUNK_TRIALS.min(total - start);
            f(k as u64, count)
        })
    }
}

/// RNG for stream `stream` of run `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
