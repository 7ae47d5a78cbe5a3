//! Paired nonparametric comparison: Wilcoxon signed-rank test, effect
//! sizes, Bonferroni correction and the all-pairs model sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest sample (after dropping zeros) for which the exact null
/// distribution is enumerated.
pub const EXACT_MAX_N: usize = 25;

/// Per-class scores of two models, aligned by class.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSample {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "paired samples differ in length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if a.is_empty() {
            return Err(Error::EmptyInput("paired sample"));
        }
        if let Some(index) = a.iter().chain(&b).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(PairedSample { a, b })
    }

    /// Builds a sample whose differences `a - b` equal `d`.
    pub fn from_differences(d: &[f64]) -> Result<Self> {
        Self::new(d.to_vec(), vec![0.0; d.len()])
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn differences(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }

    pub fn swapped(&self) -> Self {
        PairedSample {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
    /// Every difference was zero; `p` is 1 by convention.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Nonzero differences used in the ranking.
    pub n: usize,
    /// Zero differences dropped before ranking.
    pub n_zero: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`.
    pub w: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: PValueMethod,
}

/// Signed ranks of the nonzero differences, ties sharing their average rank.
/// Returns `(w_plus, w_minus, tie group sizes, zero count)`.
fn signed_ranks(d: &[f64]) -> (f64, f64, Vec<usize>, usize) {
    let mut nz: Vec<f64> = d.iter().copied().filter(|&x| x != 0.0).collect();
    let zeros = d.len() - nz.len();
    nz.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let (mut w_plus, mut w_minus) = (0.0, 0.0);
    let mut ties = Vec::new();
    let mut i = 0;
    while i < nz.len() {
        let mut j = i + 1;
        while j < nz.len() && nz[j].abs() == nz[i].abs() {
            j += 1;
        }
        // ranks i+1..=j share their mean
        let rank = (i + 1 + j) as f64 / 2.0;
        for &x in &nz[i..j] {
            if x > 0.0 {
                w_plus += rank;
            } else {
                w_minus += rank;
            }
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (w_plus, w_minus, ties, zeros)
}

/// Number of subsets of `{1..n}` with each possible sum.
fn rank_sum_counts(n: usize) -> Vec<u64> {
    let total = n * (n + 1) / 2;
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for r in 1..=n {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    counts
}

pub fn wilcoxon_signed_rank(s: &PairedSample) -> WilcoxonResult {
    let (w_plus, w_minus, ties, n_zero) = signed_ranks(&s.differences());
    let n = s.len() - n_zero;
    let w = w_plus.min(w_minus);
    if n == 0 {
        return WilcoxonResult {
            n,
            n_zero,
            w_plus,
            w_minus,
            w,
            p: 1.0,
            method: PValueMethod::Degenerate,
        };
    }

    let (p, method) = if n <= EXACT_MAX_N && ties.is_empty() {
        let counts = rank_sum_counts(n);
        let at_most = counts[..=(w as usize)].iter().sum::<u64>();
        let p = (2 * at_most) as f64 / (1u64 << n) as f64;
        (p.min(1.0), PValueMethod::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
        ((erfc(z / std::f64::consts::SQRT_2)).min(1.0), PValueMethod::Normal)
    };
    WilcoxonResult {
        n,
        n_zero,
        w_plus,
        w_minus,
        w,
        p,
        method,
    }
}

/// `min(1, m * p)`.
pub fn bonferroni(p: f64, m: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p-value {p} outside [0, 1]")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("comparison count must be >= 1".into()));
    }
    Ok((p * m as f64).min(1.0))
}

/// Effect sizes signed as first minus second; `None` where undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSizes {
    /// Mean difference over the sample standard deviation of differences.
    pub cohens_d: Option<f64>,
    /// `(W+ - W-) / (W+ + W-)` over nonzero differences.
    pub rank_biserial: Option<f64>,
}

pub fn effect_sizes(s: &PairedSample) -> Result<EffectSizes> {
    if s.len() < 2 {
        return Err(Error::InvalidArgument("effect sizes need at least two pairs".into()));
    }
    let d = s.differences();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // identical differences have zero variance even when rounding says otherwise
    let constant = d.iter().all(|&x| x == d[0]);
    let cohens_d = (!constant && var > 0.0).then(|| mean / var.sqrt());
    let (w_plus, w_minus, _, _) = signed_ranks(&d);
    let total = w_plus + w_minus;
    let rank_biserial = (total > 0.0).then(|| (w_plus - w_minus) / total);
    Ok(EffectSizes {
        cohens_d,
        rank_biserial,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub model_a: String,
    pub model_b: String,
    pub n: usize,
    pub n_zero: usize,
    pub w: f64,
    pub p: f64,
    pub p_bonferroni: f64,
    pub method: PValueMethod,
    pub cohens_d: Option<f64>,
    pub rank_biserial: Option<f64>,
    pub significant: bool,
}

/// Compares every pair of models (in input order, `i < j`) with Bonferroni
/// correction over all `k (k - 1) / 2` comparisons.
pub fn pairwise_comparisons(models: &[(String, Vec<f64>)], alpha: f64) -> Result<Vec<PairwiseRow>> {
    if models.len() < 2 {
        return Err(Error::InvalidArgument(
            "pairwise comparison needs at least two models".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    let pairs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|i| (i + 1..models.len()).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let sample = PairedSample::new(models[i].1.clone(), models[j].1.clone())?;
            let test = wilcoxon_signed_rank(&sample);
            let effects = effect_sizes(&sample)?;
            let p_bonferroni = bonferroni(test.p, m)?;
            Ok(PairwiseRow {
                model_a: models[i].0.clone(),
                model_b: models[j].0.clone(),
                n: test.n,
                n_zero: test.n_zero,
                w: test.w,
                p: test.p,
                p_bonferroni,
                method: test.method,
                cohens_d: effects.cohens_d,
                rank_biserial: effects.rank_biserial,
                significant: p_bonferroni < alpha,
            })
        })
        .collect()
}
