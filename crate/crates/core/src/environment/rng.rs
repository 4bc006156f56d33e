use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies the pseudo-random and normal-deviate algorithms behind every
/// simulated sample. Reproducibility claims hold for one value of this id.
pub const GENERATOR_ID: &str = "chacha8-stream/per-arm-chacha8/rand_distr-0.5-standard-normal-ziggurat";

/// A seeded, independently addressable random stream.
///
/// `(master_seed, stream_index)` selects one of 2^64 non-overlapping ChaCha8
/// streams under the same key, so replications can run on any thread
/// without coordinating.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

/// One ChaCha8 stream per arm, keyed by a single draw from a parent stream.
///
/// The `n`-th reward of an arm depends only on the key and `n`, not on
/// which other arms were pulled in between, so two algorithms run from the
/// same parent stream see the same reward sequence on every arm.
#[derive(Debug, Clone)]
pub struct ArmStreams {
    streams: Vec<ChaCha8Rng>,
}

impl ArmStreams {
    pub fn new(parent: &mut RngStream, n_arms_total: usize) -> Self {
        let key = parent.next_u64();
        let streams = (0..n_arms_total as u64)
            .map(|a| {
                let mut r = ChaCha8Rng::seed_from_u64(key);
                r.set_stream(a);
                r
            })
            .collect();
        ArmStreams { streams }
    }

    /// Stream of flat arm index `group * K + arm`.
    pub fn arm(&mut self, flat: usize) -> &mut ChaCha8Rng {
        &mut self.streams[flat]
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
