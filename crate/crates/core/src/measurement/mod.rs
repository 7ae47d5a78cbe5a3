//! Mask-derived chest measurements and severity grading.
//!
//! Three quantities are computed from 2D anatomy masks:
//!
//! * cardiothoracic ratio (CTR) on the frontal view: widest heart row over
//!   widest thorax row, where a row's width is `max x - min x`;
//! * spinal curvature deviation (SCD) on the frontal view: `180° - θ`, where
//!   θ is the angle at the apex vertebra between the directions to the top
//!   and bottom vertebrae, so a straight spine measures 0°;
//! * a Cobb-style angle on the lateral view: the angle between the tangents
//!   at the two ends of a smooth curve fitted through vertebral centroids.
//!
//! Inputs that do not support a stable measurement produce an excluded
//! report with a reason rather than an error.

mod curve;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use curve::{angle_between_deg, sort_superior_to_inferior, Centroid, SpineCurve};

use crate::components::{label_components, Connectivity};
use crate::error::{Error, Result};
use crate::image::Mask2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Cardiomegaly,
    Scoliosis,
    Kyphosis,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Cardiomegaly, Condition::Scoliosis, Condition::Kyphosis];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Cardiomegaly => "cardiomegaly",
            Condition::Scoliosis => "scoliosis",
            Condition::Kyphosis => "kyphosis",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cardiomegaly" | "ctr" => Ok(Condition::Cardiomegaly),
            "scoliosis" | "scd" => Ok(Condition::Scoliosis),
            "kyphosis" | "cobb" => Ok(Condition::Kyphosis),
            _ => Err(Error::InvalidArgument(format!("unknown condition {s:?}"))),
        }
    }
}

/// Ordinal severity grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Negative,
    Mild,
    Moderate,
    Severe,
}

impl Grade {
    pub const ALL: [Grade; 4] = [Grade::Negative, Grade::Mild, Grade::Moderate, Grade::Severe];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Grade> {
        Grade::ALL.get(i).copied()
    }
}

impl FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(i) = s.parse::<usize>() {
            return Grade::from_index(i).ok_or_else(|| Error::InvalidArgument(format!("grade index {i} out of range")));
        }
        match s.to_ascii_lowercase().as_str() {
            "negative" | "normal" => Ok(Grade::Negative),
            "mild" => Ok(Grade::Mild),
            "moderate" => Ok(Grade::Moderate),
            "severe" => Ok(Grade::Severe),
            _ => Err(Error::InvalidArgument(format!("unknown grade {s:?}"))),
        }
    }
}

/// CTR cut-points; each bucket includes its upper bound.
const CTR_CUTS: [f64; 3] = [0.50, 0.55, 0.60];
/// SCD cut-points in degrees; each bucket includes its lower bound.
const SCD_CUTS: [f64; 3] = [10.0, 25.0, 45.0];
/// Cobb cut-points in degrees; each bucket includes its lower bound.
const COBB_CUTS: [f64; 3] = [50.0, 60.0, 70.0];

/// Maps a measurement onto its severity grade.
pub fn grade(condition: Condition, value: f64) -> Result<Grade> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite {condition} value {value}")));
    }
    let (cuts, upper_inclusive) = match condition {
        Condition::Cardiomegaly => {
            if value < 0.0 {
                return Err(Error::InvalidArgument(format!("negative CTR {value}")));
            }
            (CTR_CUTS, true)
        }
        Condition::Scoliosis | Condition::Kyphosis => {
            if !(0.0..=180.0).contains(&value) {
                return Err(Error::InvalidArgument(format!("angle {value} outside [0, 180]")));
            }
            let cuts = if condition == Condition::Scoliosis {
                SCD_CUTS
            } else {
                COBB_CUTS
            };
            (cuts, false)
        }
    };
    let above = cuts
        .iter()
        .filter(|&&c| if upper_inclusive { value > c } else { value >= c })
        .count();
    Ok(Grade::ALL[above])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    /// Components smaller than this many pixels are discarded before measuring.
    pub min_component_px: usize,
    pub min_vertebrae_scd: usize,
    pub min_vertebrae_cobb: usize,
    /// A heart mask with more components than this is treated as fragmented.
    pub max_heart_components: usize,
    /// A heart mask whose largest component holds less than this share of
    /// the foreground is treated as fragmented.
    pub min_heart_largest_fraction: f64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            min_component_px: 8,
            min_vertebrae_scd: 4,
            min_vertebrae_cobb: 5,
            max_heart_components: 2,
            min_heart_largest_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtrEvidence {
    pub heart_width: usize,
    pub heart_row: usize,
    /// Leftmost and rightmost heart pixels on `heart_row`.
    pub heart_span: [usize; 2],
    pub thorax_width: usize,
    pub thorax_row: usize,
    pub thorax_span: [usize; 2],
    pub heart_components: usize,
    pub heart_largest_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScdEvidence {
    /// Centroids sorted superior to inferior.
    pub centroids: Vec<Centroid>,
    pub top: Centroid,
    pub bottom: Centroid,
    pub apex: Centroid,
    pub apex_index: usize,
    /// Perpendicular distance from the apex to the top-bottom chord, pixels.
    pub apex_distance: f64,
    /// Angle at the apex between the top and bottom directions, degrees.
    pub apex_angle_deg: f64,
    /// Positions of the used vertebrae in the caller's list.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertebra_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CobbEvidence {
    pub centroids: Vec<Centroid>,
    pub t_upper: f64,
    pub t_lower: f64,
    pub upper_point: Centroid,
    pub lower_point: Centroid,
    pub upper_tangent: [f64; 2],
    pub lower_tangent: [f64; 2],
    /// Tangent angle polynomial in `t`, radians.
    pub tangent_angle_coeffs: [f64; 3],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertebra_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Ctr(CtrEvidence),
    Scd(ScdEvidence),
    Cobb(CobbEvidence),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub condition: Condition,
    /// CTR is unitless; SCD and Cobb are in degrees. `None` when excluded.
    pub value: Option<f64>,
    pub grade: Option<Grade>,
    pub evidence: Option<Evidence>,
    pub excluded: bool,
    pub exclusion_reason: Option<String>,
}

impl MeasurementReport {
    fn measured(condition: Condition, value: f64, evidence: Evidence) -> Result<Self> {
        Ok(MeasurementReport {
            condition,
            value: Some(value),
            grade: Some(grade(condition, value)?),
            evidence: Some(evidence),
            excluded: false,
            exclusion_reason: None,
        })
    }

    pub fn excluded(condition: Condition, reason: impl Into<String>) -> Self {
        MeasurementReport {
            condition,
            value: None,
            grade: None,
            evidence: None,
            excluded: true,
            exclusion_reason: Some(reason.into()),
        }
    }
}

/// Drops 8-connected components smaller than `min_component_px`.
pub fn clean_mask(m: &Mask2D, min_component_px: usize) -> Mask2D {
    let comps = label_components(m, Connectivity::Eight);
    let raster = comps
        .labels
        .map(|l| u8::from(l != 0 && comps.areas[l as usize - 1] >= min_component_px));
    m.with_raster(raster)
}

/// Mean foreground coordinate, or `None` for an empty mask.
pub fn centroid(m: &Mask2D) -> Option<Centroid> {
    let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
    for (x, y) in m.foreground() {
        sx += x as u64;
        sy += y as u64;
        n += 1;
    }
    (n > 0).then(|| Centroid::new(sx as f64 / n as f64, sy as f64 / n as f64))
}

/// Leftmost and rightmost foreground columns in row `y`.
pub fn row_extent(m: &Mask2D, y: usize) -> Option<[usize; 2]> {
    let row = m.raster().row(y);
    let first = row.iter().position(|&v| v != 0)?;
    let last = row.iter().rposition(|&v| v != 0)?;
    Some([first, last])
}

/// `max x - min x` over the foreground of row `y`.
pub fn row_width(m: &Mask2D, y: usize) -> Option<usize> {
    row_extent(m, y).map(|[l, r]| r - l)
}

/// Widest row as `(width, row, span)`; ties go to the topmost row.
fn widest_row(m: &Mask2D) -> Option<(usize, usize, [usize; 2])> {
    let mut best: Option<(usize, usize, [usize; 2])> = None;
    for y in 0..m.height() {
        if let Some(span) = row_extent(m, y) {
            let w = span[1] - span[0];
            if best.is_none_or(|(bw, _, _)| w > bw) {
                best = Some((w, y, span));
            }
        }
    }
    best
}

/// Thoracic reference mask from lung and rib-cage parts: their union with
/// every row filled between its leftmost and rightmost foreground pixels.
pub fn thorax_from_parts(parts: &[Mask2D]) -> Result<Mask2D> {
    let (first, rest) = parts.split_first().ok_or(Error::EmptyInput("thorax parts"))?;
    let mut union = first.clone();
    for p in rest {
        union = union.union(p)?;
    }
    let mut filled = union.clone();
    for y in 0..union.height() {
        if let Some([l, r]) = row_extent(&union, y) {
            for x in l..=r {
                filled.set(x, y, true);
            }
        }
    }
    Ok(filled)
}

pub fn cardiothoracic_ratio(heart: &Mask2D, thorax: &Mask2D, cfg: &MeasureConfig) -> Result<MeasurementReport> {
    const C: Condition = Condition::Cardiomegaly;
    heart.ensure_same_size(thorax)?;

    let heart = clean_mask(heart, cfg.min_component_px);
    let comps = label_components(&heart, Connectivity::Eight);
    let total: usize = comps.areas.iter().sum();
    if total == 0 {
        return Ok(MeasurementReport::excluded(C, "heart mask is empty after cleaning"));
    }
    let largest_fraction = comps.largest() as f64 / total as f64;
    if comps.len() > cfg.max_heart_components || largest_fraction < cfg.min_heart_largest_fraction {
        return Ok(MeasurementReport::excluded(
            C,
            format!(
                "cardiac silhouette is fragmented ({} components, largest holds {:.3} of foreground)",
                comps.len(),
                largest_fraction
            ),
        ));
    }

    let thorax = clean_mask(thorax, cfg.min_component_px);
    let Some((thorax_width, thorax_row, thorax_span)) = widest_row(&thorax) else {
        return Ok(MeasurementReport::excluded(
            C,
            "thoracic reference mask is empty after cleaning",
        ));
    };
    if thorax_width == 0 {
        return Ok(MeasurementReport::excluded(C, "thoracic width is zero"));
    }
    let (heart_width, heart_row, heart_span) = widest_row(&heart).expect("non-empty heart");

    let ctr = heart_width as f64 / thorax_width as f64;
    MeasurementReport::measured(
        C,
        ctr,
        Evidence::Ctr(CtrEvidence {
            heart_width,
            heart_row,
            heart_span,
            thorax_width,
            thorax_row,
            thorax_span,
            heart_components: comps.len(),
            heart_largest_fraction: largest_fraction,
        }),
    )
}

/// Apex geometry over centroids in any order.
///
/// The apex is the interior centroid farthest from the chord joining the
/// most superior and most inferior centroids; ties go to the more superior
/// one. Returns `None` for fewer than three centroids or coincident points.
pub fn scd_geometry(centroids: &[Centroid]) -> Option<(f64, ScdEvidence)> {
    if centroids.len() < 3 {
        return None;
    }
    let mut sorted = centroids.to_vec();
    sort_superior_to_inferior(&mut sorted);
    let top = sorted[0];
    let bottom = *sorted.last().unwrap();
    let chord = [bottom.x - top.x, bottom.y - top.y];
    let chord_len = chord[0].hypot(chord[1]);
    if chord_len == 0.0 {
        return None;
    }

    let mut apex_index = 1;
    let mut apex_distance = f64::NEG_INFINITY;
    for (idx, c) in sorted.iter().enumerate().take(sorted.len() - 1).skip(1) {
        let d = (chord[0] * (c.y - top.y) - chord[1] * (c.x - top.x)).abs() / chord_len;
        if d > apex_distance {
            apex_distance = d;
            apex_index = idx;
        }
    }
    let apex = sorted[apex_index];
    let to_top = [top.x - apex.x, top.y - apex.y];
    let to_bottom = [bottom.x - apex.x, bottom.y - apex.y];
    if to_top == [0.0, 0.0] || to_bottom == [0.0, 0.0] {
        return None;
    }
    let apex_angle_deg = angle_between_deg(to_top, to_bottom);
    let scd = (180.0 - apex_angle_deg).max(0.0);
    Some((
        scd,
        ScdEvidence {
            centroids: sorted,
            top,
            bottom,
            apex,
            apex_index,
            apex_distance,
            apex_angle_deg,
            vertebra_indices: Vec::new(),
        },
    ))
}

/// Tangent-angle geometry over centroids in any order; `y` values must be distinct.
pub fn cobb_geometry(centroids: &[Centroid]) -> Option<(f64, CobbEvidence)> {
    let mut sorted = centroids.to_vec();
    sort_superior_to_inferior(&mut sorted);
    if sorted.windows(2).any(|w| w[1].y <= w[0].y) {
        return None;
    }
    let curve = SpineCurve::fit(&sorted)?;
    let (t_upper, t_lower) = (0.0, 1.0);
    let upper_tangent = curve.tangent(t_upper);
    let lower_tangent = curve.tangent(t_lower);
    let cobb = angle_between_deg(upper_tangent, lower_tangent);
    Some((
        cobb,
        CobbEvidence {
            upper_point: curve.position(t_upper),
            lower_point: curve.position(t_lower),
            centroids: sorted,
            t_upper,
            t_lower,
            upper_tangent,
            lower_tangent,
            tangent_angle_coeffs: curve.angle_coefficients(),
            vertebra_indices: Vec::new(),
        },
    ))
}

/// Centroids of the longest run of consecutive detected vertebrae (ties go
/// to the most superior run), with the run's indices.
fn contiguous_centroids(vertebrae: &[Mask2D], cfg: &MeasureConfig) -> Result<(Vec<Centroid>, Vec<usize>)> {
    if let Some((first, rest)) = vertebrae.split_first() {
        for v in rest {
            first.ensure_same_size(v)?;
        }
    }
    let found: Vec<Option<Centroid>> = vertebrae
        .iter()
        .map(|m| centroid(&clean_mask(m, cfg.min_component_px)))
        .collect();
    let (mut best_start, mut best_len) = (0, 0);
    let mut start = 0;
    for i in 0..=found.len() {
        if i == found.len() || found[i].is_none() {
            if i - start > best_len {
                best_start = start;
                best_len = i - start;
            }
            start = i + 1;
        }
    }
    let indices: Vec<usize> = (best_start..best_start + best_len).collect();
    let cs = indices.iter().map(|&i| found[i].unwrap()).collect();
    Ok((cs, indices))
}

/// SCD from frontal vertebral masks listed in anatomical order.
pub fn scoliosis_scd(vertebrae: &[Mask2D], cfg: &MeasureConfig) -> Result<MeasurementReport> {
    const C: Condition = Condition::Scoliosis;
    let (cs, indices) = contiguous_centroids(vertebrae, cfg)?;
    let need = cfg.min_vertebrae_scd.max(3);
    if cs.len() < need {
        return Ok(MeasurementReport::excluded(
            C,
            format!(
                "too few contiguous vertebral masks ({} found, {need} required)",
                cs.len()
            ),
        ));
    }
    match scd_geometry(&cs) {
        Some((scd, mut ev)) => {
            ev.vertebra_indices = indices;
            MeasurementReport::measured(C, scd, Evidence::Scd(ev))
        }
        None => Ok(MeasurementReport::excluded(C, "coincident vertebral centroids")),
    }
}

/// Cobb-style angle from lateral vertebral masks listed in anatomical order.
pub fn kyphosis_cobb(vertebrae: &[Mask2D], cfg: &MeasureConfig) -> Result<MeasurementReport> {
    const C: Condition = Condition::Kyphosis;
    let (cs, indices) = contiguous_centroids(vertebrae, cfg)?;
    let need = cfg.min_vertebrae_cobb.max(3);
    if cs.len() < need {
        return Ok(MeasurementReport::excluded(
            C,
            format!(
                "too few contiguous vertebral masks ({} found, {need} required)",
                cs.len()
            ),
        ));
    }
    match cobb_geometry(&cs) {
        Some((cobb, mut ev)) => {
            ev.vertebra_indices = indices;
            MeasurementReport::measured(C, cobb, Evidence::Cobb(ev))
        }
        None => Ok(MeasurementReport::excluded(
            C,
            "degenerate spine curve (repeated vertebral y positions)",
        )),
    }
}
