//! Deterministic, splittable randomness and mini-batch sampling.
//!
//! Streams are backed by the counter-based ChaCha8 generator. All float
//! derivations (uniform, normal, Poisson) are fixed here so that draws are
//! bit-identical across platforms and independent of distribution-crate
//! internals. `split` derives an independent child stream from a label
//! without consuming any parent state, so the draw order of sibling streams
//! never depends on the parallel schedule.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, ParamVector, Result};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over `bytes`, continuing from `hash`.
pub(crate) fn fnv1a(bytes: &[u8], mut hash: u64) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn chacha_key(key: u64) -> [u8; 32] {
    let mut state = key;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    seed
}

/// Deterministic random source. Identical seeds yield identical streams on
/// every platform; `split` gives independent streams per label.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    key: u64,
}

/// Builds the root random source for a seed.
pub fn make_rng(seed: u64) -> RandomSource {
    RandomSource::new(seed)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            rng: ChaCha8Rng::from_seed(chacha_key(seed)),
            key: seed,
        }
    }

    /// Derives an independent child stream. Does not consume parent state:
    /// the same `(seed, label)` always maps to the same child.
    pub fn split(&self, label: &str) -> Self {
        let child = fnv1a(label.as_bytes(), FNV_OFFSET ^ self.key);
        RandomSource::new(child)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 random mantissa bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Uniform index in `0..n`. Rejection sampling keeps it exactly unbiased.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        let n64 = n as u64;
        let bound = (u64::MAX / n64) * n64;
        loop {
            let v = self.next_u64();
            if v < bound {
                return (v % n64) as usize;
            }
        }
    }

    /// Standard normal draw (Box-Muller).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps ln finite
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Vector of i.i.d. standard normals.
    pub fn normal_vector(&mut self, dim: usize) -> ParamVector {
        ParamVector::from_fn(dim, |_, _| self.standard_normal())
    }

    /// Poisson draw with rate `lambda >= 0`. Knuth's product method for small
    /// rates; larger rates are split in halves (sums of Poissons are Poisson).
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        assert!(lambda >= 0.0 && lambda.is_finite(), "rate must be finite and >= 0");
        if lambda == 0.0 {
            return 0;
        }
        if lambda > 30.0 {
            return self.poisson(lambda / 2.0) + self.poisson(lambda / 2.0);
        }
        let limit = (-lambda).exp();
        let mut k = 0u64;
        let mut p = 1.0;
        loop {
            p *= self.uniform();
            if p <= limit {
                return k;
            }
            k += 1;
        }
    }
}

/// A realized mini-batch: component indices drawn uniformly i.i.d. with
/// replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSample {
    pub indices: Vec<usize>,
}

impl BatchSample {
    pub fn single(i: usize) -> Self {
        BatchSample { indices: vec![i] }
    }

    pub fn batch_size(&self) -> usize {
        self.indices.len()
    }
}

/// Draws `batch_size` indices uniformly with replacement from `0..n`.
pub fn sample_batch(rng: &mut RandomSource, n: usize, batch_size: usize) -> Result<BatchSample> {
    if n == 0 {
        return Err(Error::Invalid("sample_batch: n must be positive".into()));
    }
    if batch_size == 0 {
        return Err(Error::Invalid(
            "sample_batch: batch_size must be positive".into(),
        ));
    }
    if batch_size > n {
        return Err(Error::Invalid(format!(
            "sample_batch: batch_size {batch_size} exceeds n {n}"
        )));
    }
    let indices = (0..batch_size).map(|_| rng.index(n)).collect();
    Ok(BatchSample { indices })
}
