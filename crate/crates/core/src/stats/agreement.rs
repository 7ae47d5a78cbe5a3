//! Agreement between ordinal grade assignments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square count matrix, rows = truth, columns = prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// `counts` is row-major and must hold `k * k` entries with a positive total.
    pub fn new(k: usize, counts: Vec<u64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!(
                "confusion matrix needs k >= 2, got {k}"
            )));
        }
        if counts.len() != k * k {
            return Err(Error::SizeMismatch {
                expected: k * k,
                actual: counts.len(),
            });
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::EmptyInput("confusion matrix"));
        }
        Ok(ConfusionMatrix { k, counts })
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::SizeMismatch {
                expected: k,
                actual: r.len(),
            });
        }
        Self::new(k, rows.concat())
    }

    /// Tallies `(truth, prediction)` index pairs into a `k x k` matrix.
    pub fn from_pairs(k: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut counts = vec![0u64; k * k];
        for (t, p) in pairs {
            if t >= k || p >= k {
                return Err(Error::InvalidArgument(format!("grade pair ({t}, {p}) outside 0..{k}")));
            }
            counts[t * k + p] += 1;
        }
        Self::new(k, counts)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks(self.k).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.k).map(|j| (0..self.k).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k).map(<[u64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Linear,
    Quadratic,
}

impl Weighting {
    fn weight(self, i: usize, j: usize, k: usize) -> f64 {
        let d = i.abs_diff(j) as f64 / (k - 1) as f64;
        match self {
            Weighting::Linear => d,
            Weighting::Quadratic => d * d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    /// Expected disagreement was zero (one occupied cell); `value` is 1.
    pub degenerate: bool,
}

pub fn weighted_kappa(cm: &ConfusionMatrix, weighting: Weighting) -> Kappa {
    let k = cm.k();
    let total = cm.total() as f64;
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let (mut observed, mut expected) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let w = weighting.weight(i, j, k);
            observed += w * cm.get(i, j) as f64;
            expected += w * rows[i] as f64 * cols[j] as f64 / total;
        }
    }
    if expected == 0.0 {
        return Kappa {
            value: 1.0,
            degenerate: true,
        };
    }
    Kappa {
        value: 1.0 - observed / expected,
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalMetrics {
    pub accuracy: f64,
    pub off_by_one: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub per_class_f1: Vec<f64>,
    /// Classes with neither support nor predictions; counted as F1 = 0.
    pub empty_classes: Vec<usize>,
}

pub fn ordinal_metrics(cm: &ConfusionMatrix) -> OrdinalMetrics {
    let k = cm.k();
    let total = cm.total() as f64;
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let mut exact = 0u64;
    let mut near = 0u64;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                exact += cm.get(i, j);
            }
            if i.abs_diff(j) <= 1 {
                near += cm.get(i, j);
            }
        }
    }
    let mut empty_classes = Vec::new();
    let per_class_f1: Vec<f64> = (0..k)
        .map(|c| {
            let denom = rows[c] + cols[c];
            if denom == 0 {
                empty_classes.push(c);
                0.0
            } else {
                // 2PR/(P+R) with P = tp/col, R = tp/row
                2.0 * cm.get(c, c) as f64 / denom as f64
            }
        })
        .collect();
    let macro_f1 = per_class_f1.iter().sum::<f64>() / k as f64;
    let weighted_f1 = per_class_f1.iter().zip(&rows).map(|(f, &r)| f * r as f64).sum::<f64>() / total;
    OrdinalMetrics {
        accuracy: exact as f64 / total,
        off_by_one: near as f64 / total,
        macro_f1,
        weighted_f1,
        per_class_f1,
        empty_classes,
    }
}
