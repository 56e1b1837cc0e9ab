//! Seeded data generators for the benchmark distributions.
//!
//! All draws come from ChaCha8 (`rand_chacha`) seeded with a `u64` and a
//! stream id, so data is reproducible across platforms. Normals use the
//! Box-Muller transform, exponentials the inverse CDF `-ln(U) / rate`, and
//! chi-square sums `k` squared standard normals.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MedianError, Result};

pub const GENERATOR: &str = "chacha8 (rand_chacha 0.3), box-muller normals, inverse-cdf exponentials";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Uniform { a: f64, b: f64 },
    /// Parameterized by variance, as in `N(0, 25)`.
    Normal { mean: f64, variance: f64 },
    Exponential { rate: f64 },
    ChiSquare { k: u32 },
    /// Half the points from each component (the first gets the extra point
    /// for odd sizes), then shuffled.
    EvenMixture { first: Box<Distribution>, second: Box<Distribution> },
}

impl Distribution {
    pub fn uniform(a: f64, b: f64) -> Self {
        Distribution::Uniform { a, b }
    }

    pub fn normal(mean: f64, variance: f64) -> Self {
        Distribution::Normal { mean, variance }
    }

    pub fn exponential(rate: f64) -> Self {
        Distribution::Exponential { rate }
    }

    pub fn chi_square(k: u32) -> Self {
        Distribution::ChiSquare { k }
    }

    pub fn mixture(first: Distribution, second: Distribution) -> Self {
        Distribution::EvenMixture {
            first: Box::new(first),
            second: Box::new(second),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MedianError::Config(msg));
        match self {
            Distribution::Uniform { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                bad(format!("uniform needs finite a < b, got [{a}, {b}]"))
            }
            Distribution::Normal { mean, variance } if !(mean.is_finite() && variance.is_finite() && *variance >= 0.0) => {
                bad(format!("normal needs finite mean and variance >= 0, got ({mean}, {variance})"))
            }
            Distribution::Exponential { rate } if !(rate.is_finite() && *rate > 0.0) => {
                bad(format!("exponential needs rate > 0, got {rate}"))
            }
            Distribution::ChiSquare { k } if *k < 1 => bad("chi-square needs k >= 1".into()),
            Distribution::EvenMixture { first, second } => {
                first.validate()?;
                second.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Distribution::Uniform { a, b } => format!("U({a},{b})"),
            Distribution::Normal { mean, variance } => format!("N({mean},{variance})"),
            Distribution::Exponential { rate } => format!("E({rate})"),
            Distribution::ChiSquare { k } => format!("chi2({k})"),
            Distribution::EvenMixture { first, second } => format!("{}+{}", first.label(), second.label()),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Distribution::Uniform { a, b } => a + (b - a) * rng.gen::<f64>(),
            Distribution::Normal { mean, variance } => mean + variance.sqrt() * std_normal(rng),
            Distribution::Exponential { rate } => -open_unit(rng).ln() / rate,
            Distribution::ChiSquare { k } => (0..*k).map(|_| std_normal(rng).powi(2)).sum(),
            Distribution::EvenMixture { .. } => unreachable!("mixtures are generated in halves"),
        }
    }

    fn fill(&self, out: &mut Vec<f64>, n: usize, rng: &mut ChaCha8Rng) {
        match self {
            Distribution::EvenMixture { first, second } => {
                let start = out.len();
                first.fill(out, n.div_ceil(2), rng);
                second.fill(out, n / 2, rng);
                out[start..].shuffle(rng);
            }
            d => out.extend((0..n).map(|_| d.sample(rng))),
        }
    }
}

/// Uniform on `(0, 1]`, safe for `ln`.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.gen::<f64>()
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u = open_unit(rng);
    let v = rng.gen::<f64>();
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

/// `n` draws from `dist`, determined by `seed` alone.
pub fn generate(dist: &Distribution, n: usize, seed: u64) -> Result<Vec<f64>> {
    generate_stream(dist, n, seed, 0)
}

/// Like [`generate`], on an independent ChaCha stream so that many datasets
/// can share one seed.
pub fn generate_stream(dist: &Distribution, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(MedianError::Config("sample size must be at least 1".into()));
    }
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = Vec::with_capacity(n);
    dist.fill(&mut out, n, &mut rng);
    Ok(out)
}
