//! Seeded, splittable random number generation.
//!
//! Every random draw in the library goes through [`Rng`]. A generator is
//! identified by a 64-bit seed and an optional stream name; the pair is hashed
//! into the key of a ChaCha12 block cipher, so equal `(seed, name)` pairs give
//! equal sequences on every platform and distinct names give unrelated ones.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv_bytes(mut h: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Stable hash of a sequence of integers. Used to derive per-trial and
/// per-instance seeds; the value never depends on the platform or on the
/// standard library's hasher.
pub fn hash_seed(parts: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for p in parts {
        h = fnv_bytes(h, &p.to_le_bytes());
        h = splitmix64(h);
    }
    h
}

/// Stable hash of a seed and a stream name.
pub fn hash_stream(seed: u64, name: &str) -> u64 {
    let h = fnv_bytes(FNV_OFFSET, &seed.to_le_bytes());
    let h = fnv_bytes(splitmix64(h), name.as_bytes());
    splitmix64(h)
}

/// Deterministic generator. Single owner; clone it to fork an identical copy.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::stream(seed, "")
    }

    /// Generator for the named substream of `seed`.
    pub fn stream(seed: u64, name: &str) -> Self {
        let key = hash_stream(seed, name);
        let mut bytes = [0u8; 32];
        for (i, chunk) in bytes.chunks_mut(8).enumerate() {
            chunk.copy_from_slice(&splitmix64(key.wrapping_add(i as u64)).to_le_bytes());
        }
        Self {
            seed,
            inner: ChaCha12Rng::from_seed(bytes),
        }
    }

    /// Independent generator keyed by this generator's seed and `name`.
    /// Does not consume draws from `self`.
    pub fn derive(&self, name: &str) -> Self {
        Self::stream(hash_stream(self.seed, "derive"), name)
    }

    /// Independent generator keyed by this generator's seed and an index.
    pub fn derive_indexed(&self, name: &str, index: u64) -> Self {
        Self::stream(hash_seed(&[hash_stream(self.seed, name), index]), name)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn sample<T, D: Distribution<T>>(&mut self, dist: &D) -> T {
        dist.sample(&mut self.inner)
    }

    /// `d` i.i.d. standard normal draws.
    pub fn gaussian_vector(&mut self, d: usize) -> Vec<f64> {
        (0..d).map(|_| self.normal()).collect()
    }

    /// Uniform random permutation of `0..n` (Fisher-Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            p.swap(i, j);
        }
        p
    }
}
