//! Deterministic per-trial random streams.
//!
//! Every Monte Carlo loop derives the generator for trial `t` from
//! `(master_seed, t)` alone, so serial and parallel runs see identical draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for trial `trial` of a run seeded with `master`.
pub fn trial_rng(master: u64, trial: u64) -> Rng {
    stream_rng(master, trial, 0)
}

/// Generator for an independent sub-stream `salt` of trial `trial`.
pub fn stream_rng(master: u64, trial: u64, salt: u64) -> Rng {
    let a = mix64(master ^ mix64(trial.wrapping_add(0x6A09_E667_F3BC_C909)));
    let b = mix64(a ^ mix64(salt.wrapping_add(0xBB67_AE85_84CA_A73B)));
    Rng::seed_from_u64(b)
}

/// Runs `fold` over trials `0..trials` in fixed-size chunks and merges the
/// chunk accumulators in chunk order. The result does not depend on the
/// number of worker threads.
pub fn chunked_reduce<A, I, F, M>(trials: u64, chunk: u64, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, u64) + Sync + Send,
    M: Fn(&mut A, A),
{
    let chunk = chunk.max(1);
    let n_chunks = trials.div_ceil(chunk);
    let run = |c: u64| {
        let mut acc = init();
        let lo = c * chunk;
        let hi = (lo + chunk).min(trials);
        for t in lo..hi {
            fold(&mut acc, t);
        }
        acc
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<A> = {
        use rayon::prelude::*;
        (0..n_chunks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<A> = (0..n_chunks).map(run).collect();
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    total
}

/// Ordered parallel map over `0..len`.
pub fn par_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}
