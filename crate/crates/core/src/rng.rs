//! Reproducible, splittable random streams.
//!
//! A stream is addressed by `(seed, stream_id)` and backed by ChaCha8, which is
//! itself counter-based: the seed is the key, the stream id selects the nonce,
//! and the word position is the counter. Any worker can therefore reconstruct
//! any stream without coordination, and the output never depends on how work
//! was scheduled.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// An independent random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of labels into a single stream id.
pub fn derive_stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6a09_e667_f3bc_c909_u64, |acc, &p| {
        mix64(acc ^ mix64(p.wrapping_add(0x9e37_79b9_7f4a_7c15)))
    })
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    /// Stream for a labelled unit of work under a common seed.
    pub fn for_unit(seed: u64, labels: &[u64]) -> Self {
        Self::new(seed, derive_stream_id(labels))
    }

    /// Child stream `index` of this stream. Children of distinct parents or
    /// distinct indices are distinct streams.
    pub fn child(&self, index: u64) -> Self {
        Self::new(self.seed, derive_stream_id(&[self.stream_id, index]))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`, safe to pass to `ln`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
