//! Seed derivation and Monte Carlo summaries shared by every estimator.
//!
//! Trial `t` of a stream named `stream` under master seed `seed` always uses
//! `derive_seed(seed, stream, t)`, so results do not depend on how trials are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The random number generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Two-sided 95% standard-normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for trial `index` of the named stream.
pub fn derive_seed(seed: u64, stream: &str, index: u64) -> u64 {
    let mut h = splitmix64(seed);
    for chunk in stream.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = splitmix64(h ^ u64::from_le_bytes(word));
    }
    h = splitmix64(h ^ stream.len() as u64);
    splitmix64(h ^ index)
}

/// A generator seeded for trial `index` of the named stream.
pub fn trial_rng(seed: u64, stream: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stream, index))
}

/// Sample mean with a 95% normal-approximation confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci_halfwidth: f64,
}

impl MeanCi {
    /// Summarizes `samples`; the half-width is zero for fewer than two samples.
    pub fn of(samples: &[f64]) -> MeanCi {
        let n = samples.len() as f64;
        if samples.is_empty() {
            return MeanCi { mean: f64::NAN, ci_halfwidth: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / n;
        if samples.len() < 2 {
            return MeanCi { mean, ci_halfwidth: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        MeanCi { mean, ci_halfwidth: Z95 * (var / n).sqrt() }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci_halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_halfwidth
    }

    pub fn covers(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}
