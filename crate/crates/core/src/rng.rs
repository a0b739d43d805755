//! Seeded uniform random streams.
//!
//! The generator is fixed: ChaCha8 (`rand_chacha`) keyed by
//! `ChaCha8Rng::seed_from_u64(seed)`. The root stream uses ChaCha stream
//! id 0; a named substream uses stream id `fnv1a_64(name)` under the same
//! key. A uniform draw takes the top 53 bits of one `next_u64` and scales by
//! 2^-53, so every draw lies in `[0, 1)` and the sequence for a given seed
//! is identical on every platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a_64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    draws: u64,
}

impl RandomStream {
    /// Root stream for `seed`.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Substream that depends only on `(seed, name)`.
    pub fn substream(seed: u64, name: &str) -> Self {
        Self::with_stream(seed, fnv1a_64(name.as_bytes()))
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            stream,
            rng,
            draws: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Number of uniforms drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform real in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]` (inclusive), via `uniform`.
    pub fn uniform_int(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as f64;
        let k = (self.uniform() * span).floor() as i64;
        lo + k.min(hi - lo)
    }

    /// `true` with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
