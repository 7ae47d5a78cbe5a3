use serde::{Deserialize, Serialize};

use super::percentile_sorted;
use super::rng::SplitMix64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 10_000,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_resamples == 0 {
            return Err(Error::InvalidArgument("n_resamples must be >= 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!("level {} outside (0, 1)", self.level)));
        }
        Ok(())
    }
}

/// Point estimate and percentile interval for a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl BootstrapCi {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Percentile bootstrap interval of the mean.
///
/// Each resample draws `values.len()` indices with [`SplitMix64::index`];
/// the interval bounds are the `(1 - level) / 2` and `(1 + level) / 2`
/// quantiles (linear interpolation) of the resampled means.
pub fn bootstrap_ci(values: &[f64], cfg: &BootstrapConfig) -> Result<BootstrapCi> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(Error::EmptyInput("bootstrap values"));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = SplitMix64::new(cfg.seed);
    let mut means: Vec<f64> = (0..cfg.n_resamples)
        .map(|_| {
            let mut sum = 0.0;
            for _ in 0..n {
                sum += values[rng.index(n)];
            }
            sum / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = 1.0 - cfg.level;
    Ok(BootstrapCi {
        mean,
        lo: percentile_sorted(&means, alpha / 2.0),
        hi: percentile_sorted(&means, 1.0 - alpha / 2.0),
    })
}
