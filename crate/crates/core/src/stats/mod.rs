//! Confidence intervals, paired tests and ordinal agreement.

mod agreement;
mod bootstrap;
mod rng;
mod wilcoxon;

pub use agreement::{ordinal_metrics, weighted_kappa, ConfusionMatrix, Kappa, OrdinalMetrics, Weighting};
pub use bootstrap::{bootstrap_ci, BootstrapCi, BootstrapConfig};
pub use rng::SplitMix64;
pub use wilcoxon::{
    bonferroni, effect_sizes, pairwise_comparisons, wilcoxon_signed_rank, EffectSizes, PValueMethod, PairedSample,
    PairwiseRow, WilcoxonResult, EXACT_MAX_N,
};

/// Quantile of sorted data by linear interpolation at position `q (n - 1)`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
