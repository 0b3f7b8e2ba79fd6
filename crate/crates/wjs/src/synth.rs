//! Synthetic sparse corpora with controlled weight distributions.
//!
//! Each document draws a fixed-size support uniformly without replacement
//! from the feature space, then weights the chosen features i.i.d. from
//! the configured law. Documents are generated from independent
//! per-document streams, so a corpus is reproducible from its seed no
//! matter how callers iterate it.

use crate::sketch::SparseWeightedSet;
use crate::variates::{mix64, GOLDEN_GAMMA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightLaw {
    /// Weights on `(lo, hi]` — open at the bottom so they stay positive
    /// even when `lo` is 0.
    Uniform { lo: f64, hi: f64 },
    /// Pareto weights: `scale / u^(1/exponent)`, support `[scale, ∞)`.
    PowerLaw { exponent: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub doc_count: usize,
    pub feature_count: u64,
    /// Fraction of the feature space present in each document, in (0, 1].
    pub density: f64,
    pub law: WeightLaw,
    pub gen_seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("density {density} over {features} features leaves no support")]
    DegenerateConfig { density: f64, features: u64 },
    #[error("density must lie in (0, 1], got {0}")]
    InvalidDensity(f64),
    #[error("uniform law needs 0 <= lo < hi, got [{lo}, {hi}]")]
    InvalidUniformRange { lo: f64, hi: f64 },
    #[error("power law with exponent {0} <= 1 has no finite mean")]
    UndefinedMean(f64),
    #[error("power law scale must be positive, got {0}")]
    InvalidScale(f64),
}

/// Ceiling that forgives the last-ulp excess of products like
/// `0.05 · 5000`, which lands just above 250 in floating point and would
/// otherwise round a clean configuration up a slot.
fn support_size(density: f64, feature_count: u64) -> u64 {
    (density * feature_count as f64 - 1e-9).ceil().max(1.0) as u64
}

impl SynthConfig {
    fn validate(&self) -> Result<u64, SynthError> {
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(SynthError::InvalidDensity(self.density));
        }
        if self.density * (self.feature_count as f64) < 1.0 {
            return Err(SynthError::DegenerateConfig {
                density: self.density,
                features: self.feature_count,
            });
        }
        match self.law {
            WeightLaw::Uniform { lo, hi } => {
                if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                    return Err(SynthError::InvalidUniformRange { lo, hi });
                }
            }
            WeightLaw::PowerLaw { exponent, scale } => {
                // NaN must land in the error arm too, so don't rewrite
                // this as `exponent <= 1.0`.
                if !exponent.is_finite() || exponent <= 1.0 {
                    return Err(SynthError::UndefinedMean(exponent));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(SynthError::InvalidScale(scale));
                }
            }
        }
        Ok(support_size(self.density, self.feature_count))
    }
}

fn draw_weight(law: WeightLaw, rng: &mut ChaCha8Rng) -> f64 {
    // 1 - u ∈ (0, 1]: keeps uniform weights above lo and the power law
    // finite at its lower bound.
    let u = 1.0 - rng.gen::<f64>();
    match law {
        WeightLaw::Uniform { lo, hi } => lo + (hi - lo) * u,
        WeightLaw::PowerLaw { exponent, scale } => scale / u.powf(1.0 / exponent),
    }
}

/// Generate the corpus described by `config`. Document ids are the
/// positions 0..doc_count.
pub fn generate_corpus(config: &SynthConfig) -> Result<Vec<SparseWeightedSet>, SynthError> {
    let support = config.validate()?;
    let mut docs = Vec::with_capacity(config.doc_count);
    for doc in 0..config.doc_count {
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(
            config
                .gen_seed
                .wrapping_add((doc as u64 + 1).wrapping_mul(GOLDEN_GAMMA)),
        ));
        let mut ids = rand::seq::index::sample(
            &mut rng,
            config.feature_count as usize,
            support as usize,
        )
        .into_vec();
        ids.sort_unstable();
        let entries: Vec<(u64, f64)> = ids
            .into_iter()
            .map(|id| (id as u64, draw_weight(config.law, &mut rng)))
            .collect();
        docs.push(
            SparseWeightedSet::new(doc as u64, entries)
                .expect("generated weights are positive and ids distinct"),
        );
    }
    Ok(docs)
}
