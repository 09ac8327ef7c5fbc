//! Fixed-positive datasets with a controlled noise:event ratio.
//!
//! The noise pool is shuffled once per seed and the first
//! `round(ratio * n_pos)` traces are taken (halves round away from zero), so
//! for one seed a lower ratio's noise is a prefix of a higher ratio's.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RatioError {
    #[error("ratio {ratio} needs {needed} noise traces, pool has {available} (short by {shortfall})")]
    InsufficientNoise {
        ratio: f64,
        needed: usize,
        available: usize,
        shortfall: usize,
    },
    #[error("invalid ratio {0}: must be finite and > 0")]
    InvalidRatio(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatioSpec {
    pub ratios: Vec<f64>,
    pub seed: u64,
}

impl RatioSpec {
    pub fn validate(&self) -> Result<(), RatioError> {
        for &r in &self.ratios {
            noise_count(r, 0)?;
        }
        Ok(())
    }
}

impl Default for RatioSpec {
    fn default() -> Self {
        Self {
            ratios: vec![1.73, 5.0, 10.0, 25.0, 50.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioDataset<T> {
    /// Positives first, then the sampled noise.
    pub items: Vec<T>,
    pub n_pos: usize,
    pub n_noise: usize,
    pub requested_ratio: f64,
}

impl<T> RatioDataset<T> {
    pub fn achieved_ratio(&self) -> f64 {
        if self.n_pos == 0 {
            return 0.0;
        }
        self.n_noise as f64 / self.n_pos as f64
    }
}

pub fn noise_count(ratio: f64, n_pos: usize) -> Result<usize, RatioError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(RatioError::InvalidRatio(ratio));
    }
    Ok((ratio * n_pos as f64).round() as usize)
}

pub fn build_ratio_dataset<T: Clone>(
    positives: &[T],
    noise_pool: &[T],
    ratio: f64,
    seed: u64,
) -> Result<RatioDataset<T>, RatioError> {
    let needed = noise_count(ratio, positives.len())?;
    if needed > noise_pool.len() {
        return Err(RatioError::InsufficientNoise {
            ratio,
            needed,
            available: noise_pool.len(),
            shortfall: needed - noise_pool.len(),
        });
    }
    let mut idx: Vec<usize> = (0..noise_pool.len()).collect();
    idx.shuffle(&mut seed::rng(seed::stage_seed(seed, "ratio.noise")));
    let mut items = positives.to_vec();
    items.extend(idx[..needed].iter().map(|&i| noise_pool[i].clone()));
    Ok(RatioDataset {
        items,
        n_pos: positives.len(),
        n_noise: needed,
        requested_ratio: ratio,
    })
}
