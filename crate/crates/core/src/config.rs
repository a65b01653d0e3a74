//! Shared numeric configuration and deterministic seed derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Tolerances, sample budgets and the base seed shared by every estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericConfig {
    /// Ray-parameter tolerance for bisection.
    pub tol_bisect: f64,
    /// Half-width of the membership boundary band.
    pub tol_value: f64,
    pub sample_budget: usize,
    pub shrink_factor: f64,
    pub rng_seed: u64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            tol_bisect: 1e-10,
            tol_value: 1e-9,
            sample_budget: 4096,
            shrink_factor: 0.5,
            rng_seed: 42,
        }
    }
}

impl NumericConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol_bisect > 0.0) {
            return Err(ConfigError::NonPositive("tol_bisect", self.tol_bisect));
        }
        if !(self.tol_value > 0.0) {
            return Err(ConfigError::NonPositive("tol_value", self.tol_value));
        }
        if self.sample_budget == 0 {
            return Err(ConfigError::EmptyBudget);
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(ConfigError::ShrinkFactor(self.shrink_factor));
        }
        Ok(())
    }

    /// Generator for one named sampling stream of this configuration.
    pub fn rng(&self, tag: &str, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.rng_seed, tag, index))
    }
}

/// Mixes a base seed with a stream tag and index (FNV-1a over the tag, then splitmix64).
pub fn derive_seed(base: u64, tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(base ^ splitmix64(h ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
