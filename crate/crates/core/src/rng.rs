//! Reproducible random streams.
//!
//! A [`RandomSource`] is keyed by `(seed, stream)`. Bags assign one stream per
//! pattern ordinal, so the same bag comes out no matter how patterns are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};

/// Random deviates consumed by the pattern generators.
pub trait Deviates {
    /// A draw from U(0, 1), excluding both ends.
    fn uniform(&mut self) -> f64;
    /// A draw from N(0, 1).
    fn std_normal(&mut self) -> f64;
}

#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { rng, seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl Deviates for RandomSource {
    #[inline]
    fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    #[inline]
    fn std_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Mixes a base seed with labels (generator, cell index, ...) into a new seed.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l.wrapping_add(0x632B_E59B_D9B4_E019))))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Replays fixed deviates; used to drive generators through hand traces.
#[derive(Debug, Clone, Default)]
pub struct ScriptedDeviates {
    uniforms: Vec<f64>,
    normals: Vec<f64>,
    next_uniform: usize,
    next_normal: usize,
}

impl ScriptedDeviates {
    /// Missing values past the end of either script read as 0.5 (uniform)
    /// and 0.0 (normal).
    pub fn new(uniforms: Vec<f64>, normals: Vec<f64>) -> Self {
        ScriptedDeviates { uniforms, normals, next_uniform: 0, next_normal: 0 }
    }
}

impl Deviates for ScriptedDeviates {
    fn uniform(&mut self) -> f64 {
        let v = self.uniforms.get(self.next_uniform).copied().unwrap_or(0.5);
        self.next_uniform += 1;
        v
    }

    fn std_normal(&mut self) -> f64 {
        let v = self.normals.get(self.next_normal).copied().unwrap_or(0.0);
        self.next_normal += 1;
        v
    }
}
