//! Segmentation quality: region overlap, boundary distances and
//! component-level detection, plus class-set aggregation.
//!
//! Distances are in pixels between pixel centres. Boundary pixels are
//! foreground pixels with a 4-neighbour in the background or on the image
//! edge.

mod edt;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use edt::squared_distance_to;

use crate::components::{label_components, Connectivity};
use crate::error::{Error, Result};
use crate::image::{Mask2D, Raster};
use crate::stats::{bootstrap_ci, percentile_sorted, BootstrapConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Distance within which a boundary point counts as agreeing.
    pub nsd_tolerance_px: f64,
    /// Minimum component IoU for a detection match.
    pub match_iou: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            nsd_tolerance_px: 2.0,
            match_iou: 0.5,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nsd_tolerance_px.is_finite() && self.nsd_tolerance_px >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nsd_tolerance_px must be finite and >= 0, got {}",
                self.nsd_tolerance_px
            )));
        }
        if !(self.match_iou > 0.0 && self.match_iou <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "match_iou {} outside (0, 1]",
                self.match_iou
            )));
        }
        Ok(())
    }
}

/// Which side, if any, had no foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degenerate {
    #[default]
    None,
    BothEmpty,
    PredEmpty,
    RefEmpty,
}

impl Degenerate {
    fn of(pred_empty: bool, ref_empty: bool) -> Self {
        match (pred_empty, ref_empty) {
            (true, true) => Degenerate::BothEmpty,
            (true, false) => Degenerate::PredEmpty,
            (false, true) => Degenerate::RefEmpty,
            (false, false) => Degenerate::None,
        }
    }

    pub fn is_degenerate(self) -> bool {
        self != Degenerate::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub dice: f64,
    pub iou: f64,
    pub degenerate: Degenerate,
}

pub fn overlap(pred: &Mask2D, reference: &Mask2D) -> Result<Overlap> {
    pred.ensure_same_size(reference)?;
    let (mut inter, mut union, mut np, mut nr) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &r) in pred.raster().data().iter().zip(reference.raster().data()) {
        let (p, r) = (p != 0, r != 0);
        inter += (p && r) as usize;
        union += (p || r) as usize;
        np += p as usize;
        nr += r as usize;
    }
    let degenerate = Degenerate::of(np == 0, nr == 0);
    let (dice, iou) = match degenerate {
        Degenerate::BothEmpty => (1.0, 1.0),
        _ => (2.0 * inter as f64 / (np + nr) as f64, inter as f64 / union as f64),
    };
    Ok(Overlap { dice, iou, degenerate })
}

/// Inner 4-neighbourhood boundary of the foreground.
pub fn boundary(m: &Mask2D) -> Raster<u8> {
    let (w, h) = m.size();
    Raster::from_fn(w, h, |x, y| {
        let edge = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
        let on = m.get(x, y) && (edge || !m.get(x - 1, y) || !m.get(x + 1, y) || !m.get(x, y - 1) || !m.get(x, y + 1));
        on as u8
    })
    .expect("mask dimensions are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDistances {
    pub hd95: f64,
    pub asd: f64,
    pub nsd: f64,
    pub degenerate: Degenerate,
}

/// Distances from each boundary pixel of `from` to the boundary of `to`,
/// in raster order of `from`.
fn directed(from: &Raster<u8>, to_dist2: &Raster<f64>) -> Vec<f64> {
    from.data()
        .iter()
        .zip(to_dist2.data())
        .filter(|(&b, _)| b != 0)
        .map(|(_, &d2)| d2.sqrt())
        .collect()
}

pub fn boundary_distances(pred: &Mask2D, reference: &Mask2D, nsd_tolerance_px: f64) -> Result<BoundaryDistances> {
    pred.ensure_same_size(reference)?;
    let degenerate = Degenerate::of(pred.is_empty(), reference.is_empty());
    match degenerate {
        Degenerate::BothEmpty => {
            return Ok(BoundaryDistances {
                hd95: 0.0,
                asd: 0.0,
                nsd: 1.0,
                degenerate,
            })
        }
        Degenerate::PredEmpty | Degenerate::RefEmpty => {
            let (w, h) = pred.size();
            let diagonal = (w as f64).hypot(h as f64);
            return Ok(BoundaryDistances {
                hd95: diagonal,
                asd: diagonal,
                nsd: 0.0,
                degenerate,
            });
        }
        Degenerate::None => {}
    }
    let bp = boundary(pred);
    let br = boundary(reference);
    let mut d_pr = directed(&bp, &squared_distance_to(&br));
    let mut d_rp = directed(&br, &squared_distance_to(&bp));
    let pooled = d_pr.len() + d_rp.len();
    let sum: f64 = d_pr.iter().chain(&d_rp).sum();
    let within = d_pr.iter().chain(&d_rp).filter(|&&d| d <= nsd_tolerance_px).count();
    d_pr.sort_by(f64::total_cmp);
    d_rp.sort_by(f64::total_cmp);
    let hd95 = percentile_sorted(&d_pr, 0.95).max(percentile_sorted(&d_rp, 0.95));
    Ok(BoundaryDistances {
        hd95,
        asd: sum / pooled as f64,
        nsd: within as f64 / pooled as f64,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_pred: usize,
    pub n_ref: usize,
    pub matched: usize,
    pub degenerate: Degenerate,
}

/// Greedy one-to-one matching of 8-connected components.
///
/// Candidate pairs with IoU at least `match_iou` are taken in descending
/// IoU order, ties broken by (pred index, ref index).
pub fn component_detection(pred: &Mask2D, reference: &Mask2D, match_iou: f64) -> Result<Detection> {
    pred.ensure_same_size(reference)?;
    let cp = label_components(pred, Connectivity::Eight);
    let cr = label_components(reference, Connectivity::Eight);
    let degenerate = Degenerate::of(cp.is_empty(), cr.is_empty());
    let (n_pred, n_ref) = (cp.len(), cr.len());
    let mut result = Detection {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        n_pred,
        n_ref,
        matched: 0,
        degenerate,
    };
    match degenerate {
        Degenerate::BothEmpty => {
            result.precision = 1.0;
            result.recall = 1.0;
            result.f1 = 1.0;
            return Ok(result);
        }
        Degenerate::PredEmpty | Degenerate::RefEmpty => return Ok(result),
        Degenerate::None => {}
    }

    let mut intersections: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&a, &b) in cp.labels.data().iter().zip(cr.labels.data()) {
        if a != 0 && b != 0 {
            *intersections.entry((a as usize - 1, b as usize - 1)).or_default() += 1;
        }
    }
    let mut candidates: Vec<(f64, usize, usize)> = intersections
        .into_iter()
        .map(|((p, r), inter)| {
            let union = cp.areas[p] + cr.areas[r] - inter;
            (inter as f64 / union as f64, p, r)
        })
        .filter(|&(iou, _, _)| iou >= match_iou)
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_p = vec![false; n_pred];
    let mut used_r = vec![false; n_ref];
    let mut matched = 0;
    for (_, p, r) in candidates {
        if !used_p[p] && !used_r[r] {
            used_p[p] = true;
            used_r[r] = true;
            matched += 1;
        }
    }
    let precision = matched as f64 / n_pred as f64;
    let recall = matched as f64 / n_ref as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Detection {
        precision,
        recall,
        f1,
        matched,
        ..result
    })
}

/// All metrics for one prediction/reference pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dice: f64,
    pub iou: f64,
    pub hd95: f64,
    pub asd: f64,
    pub nsd: f64,
    pub det_precision: f64,
    pub det_recall: f64,
    pub det_f1: f64,
    pub degenerate: Degenerate,
}

impl MetricsReport {
    pub const METRIC_NAMES: [&'static str; 8] = [
        "dice",
        "iou",
        "hd95",
        "asd",
        "nsd",
        "det_precision",
        "det_recall",
        "det_f1",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.dice,
            self.iou,
            self.hd95,
            self.asd,
            self.nsd,
            self.det_precision,
            self.det_recall,
            self.det_f1,
        ]
    }
}

pub fn evaluate_pair(pred: &Mask2D, reference: &Mask2D, cfg: &MetricsConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let o = overlap(pred, reference)?;
    let b = boundary_distances(pred, reference, cfg.nsd_tolerance_px)?;
    let d = component_detection(pred, reference, cfg.match_iou)?;
    Ok(MetricsReport {
        dice: o.dice,
        iou: o.iou,
        hd95: b.hd95,
        asd: b.asd,
        nsd: b.nsd,
        det_precision: d.precision,
        det_recall: d.recall,
        det_f1: d.f1,
        degenerate: o.degenerate,
    })
}

#[derive(Debug, Clone)]
pub struct ClassPair {
    pub class_id: String,
    pub pred: Mask2D,
    pub reference: Mask2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class_id: String,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// Mean over classes with its percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_classes: usize,
    pub n_degenerate: usize,
    /// Keyed by metric name, in [`MetricsReport::METRIC_NAMES`] order when
    /// serialized through [`Aggregate::ordered`].
    pub metrics: BTreeMap<String, MetricSummary>,
}

impl Aggregate {
    pub fn ordered(&self) -> Vec<(&'static str, MetricSummary)> {
        MetricsReport::METRIC_NAMES
            .iter()
            .filter_map(|&n| self.metrics.get(n).map(|s| (n, *s)))
            .collect()
    }
}

/// Bootstraps each metric over classes. Every metric uses the same seed,
/// so all intervals are drawn from the same class resamples.
pub fn aggregate(reports: &[MetricsReport], boot: &BootstrapConfig) -> Result<Aggregate> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("class set"));
    }
    let summaries = MetricsReport::METRIC_NAMES
        .par_iter()
        .enumerate()
        .map(|(m, &name)| {
            let values: Vec<f64> = reports.iter().map(|r| r.values()[m]).collect();
            let ci = bootstrap_ci(&values, boot)?;
            Ok((
                name.to_string(),
                MetricSummary {
                    mean: ci.mean,
                    lo: ci.lo,
                    hi: ci.hi,
                    half_width: ci.half_width(),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Aggregate {
        n_classes: reports.len(),
        n_degenerate: reports.iter().filter(|r| r.degenerate.is_degenerate()).count(),
        metrics: summaries.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSetReport {
    pub classes: Vec<ClassReport>,
    pub aggregate: Aggregate,
}

/// Evaluates every class in parallel, keeping input order.
pub fn evaluate_class_set(pairs: &[ClassPair], cfg: &MetricsConfig, boot: &BootstrapConfig) -> Result<ClassSetReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("class set"));
    }
    cfg.validate()?;
    let classes = pairs
        .par_iter()
        .map(|p| {
            evaluate_pair(&p.pred, &p.reference, cfg)
                .map(|metrics| ClassReport {
                    class_id: p.class_id.clone(),
                    metrics,
                })
                .map_err(|e| e.for_class(&p.class_id))
        })
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<MetricsReport> = classes.iter().map(|c| c.metrics).collect();
    let aggregate = aggregate(&reports, boot)?;
    Ok(ClassSetReport { classes, aggregate })
}
