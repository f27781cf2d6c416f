//! Deterministic RNG streams.
//!
//! Every random choice in a run is drawn from a ChaCha12 stream addressed by
//! (master seed, purpose), so outputs are reproducible regardless of
//! evaluation order and per-bucket work cannot perturb other buckets.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose of one derived stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// The hashing randomness (h_1..h_d, b).
    Hash,
    /// The shared importance-sample set 𝒯.
    ImportanceSamples,
    /// All randomness consumed while recovering bucket j (1-based).
    Bucket(u32),
    /// Amplitude Monte-Carlo integration for candidate i (0-based).
    Amplitude(u32),
    /// Instance generation.
    Generator,
    /// Free-form stream for tests and probes.
    Probe(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Hash => 1,
            Stream::ImportanceSamples => 2,
            Stream::Generator => 3,
            Stream::Bucket(j) => 0x1_0000 + j as u64,
            Stream::Amplitude(i) => 0x2_0000_0000 + i as u64,
            Stream::Probe(i) => 0x3_0000_0000 + i as u64,
        }
    }
}

/// RNG for (seed, stream), independent of all other streams.
pub fn rng_for(seed: u64, stream: Stream) -> ChaCha12Rng {
    rng_for_restart(seed, 0, stream)
}

/// RNG for (seed, restart, stream). Restart r shifts every stream id so a
/// restarted run shares nothing with earlier attempts.
pub fn rng_for_restart(seed: u64, restart: u32, stream: Stream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((restart as u64) << 40 | stream.id());
    rng
}
