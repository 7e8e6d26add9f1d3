//! Seedable, splittable random streams.
//!
//! Every stochastic draw in the crate goes through [`RngStream`]. A stream is
//! identified by `(seed, stream_id)`: the seed is expanded into a ChaCha20 key
//! and the stream id selects the ChaCha stream (nonce), so two streams with the
//! same seed and different ids never share keystream. Children are derived
//! positionally with [`RngStream::split`], which makes scan cells and replicas
//! reproducible independently of execution order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Name and version of the generator, recorded in run manifests.
pub const GENERATOR_NAME: &str = "chacha20/rand_chacha-0.3;key=splitmix64(seed);stream=mix64(parent,child)";

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    mix64(*state)
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic stream of random variates.
///
/// Cloning copies the full generator state, so a clone replays the same
/// sequence. A single stream must not be shared between threads; give each
/// worker its own child from [`split`](Self::split).
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    core: ChaCha20Rng,
}

impl RngStream {
    /// Root stream (`stream_id = 0`) for a master seed.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut core = ChaCha20Rng::from_seed(key);
        core.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            core,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives an independent child stream keyed by `child_id`.
    ///
    /// The child depends only on `(seed, stream_id, child_id)`, never on how
    /// many variates the parent has produced, and drawing from the child does
    /// not advance the parent.
    pub fn split(&self, child_id: u64) -> RngStream {
        let id = mix64(
            mix64(self.stream_id ^ 0x5851_f42d_4c95_7f2d).wrapping_add(child_id.wrapping_mul(GOLDEN_GAMMA)),
        );
        Self::with_stream(self.seed, id)
    }

    /// Child keyed by a path of ids, e.g. `(row, col, replica)`.
    pub fn split_path(&self, path: &[u64]) -> RngStream {
        path.iter().fold(self.clone_fresh(), |s, &id| s.split(id))
    }

    fn clone_fresh(&self) -> RngStream {
        Self::with_stream(self.seed, self.stream_id)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1)`. Exact zeros are rejected and redrawn.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard exponential variate, `-ln U` with `U` on `(0, 1)`.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Uniform integer in `0..n` (unbiased). Panics if `n == 0`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
