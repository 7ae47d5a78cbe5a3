//! Volumetric-to-radiographic projection.
//!
//! Intensities are first mapped to non-negative attenuation values
//! `max(1 + HU / 1000, 0)`. A PA image sums those values along `j` and
//! scales by `sy`; an LL image sums along `i` and scales by `sx`. Label
//! volumes project to footprints by a logical OR along the same rays.
//! Both are then resampled to isotropic pixels (bilinear for images,
//! nearest-neighbour for masks), reoriented, optionally resized, and
//! images are stretched to the 8-bit range.

mod orient;
mod resample;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use orient::{OrientOp, Orientation};
pub use resample::{resize_bilinear, resize_nearest, Interpolation};

use crate::error::{Error, Result};
use crate::image::{Mask2D, PixelSpacing, Projection, Raster, View};
use crate::volume::{LabelVolume, Spacing, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    pub views: Vec<View>,
    /// Isotropic pixel size after resampling, in millimetres.
    pub target_pixel_spacing: f64,
    /// Optional final `[width, height]`.
    pub output_size: Option<[usize; 2]>,
    pub orientation: Orientation,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            views: View::ALL.to_vec(),
            target_pixel_spacing: 1.0,
            output_size: None,
            orientation: Orientation::default(),
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_pixel_spacing.is_finite() && self.target_pixel_spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "target_pixel_spacing must be > 0, got {}",
                self.target_pixel_spacing
            )));
        }
        if let Some([w, h]) = self.output_size {
            if w == 0 || h == 0 {
                return Err(Error::InvalidArgument(format!("output_size {w}x{h} has a zero extent")));
            }
        }
        if self.views.is_empty() {
            return Err(Error::InvalidArgument("no views requested".into()));
        }
        for (n, v) in self.views.iter().enumerate() {
            if self.views[..n].contains(v) {
                return Err(Error::InvalidArgument(format!("view {v} listed twice")));
            }
        }
        Ok(())
    }
}

/// Maps intensities to attenuation-like values: `max(1 + v / 1000, 0)`.
pub fn attenuation_transform(v: &Volume) -> Volume {
    v.map(|hu| (1.0 + hu / 1000.0).max(0.0))
        .expect("transform of a finite volume is finite")
}

/// Spacing of a raw projection's columns (`k`) and rows (`i` or `j`).
pub fn raw_pixel_spacing(spacing: Spacing, view: View) -> PixelSpacing {
    match view {
        View::Pa => PixelSpacing {
            x: spacing.sz,
            y: spacing.sx,
        },
        View::Ll => PixelSpacing {
            x: spacing.sz,
            y: spacing.sy,
        },
    }
}

/// Line-integral projection of an attenuation volume.
///
/// The raw image has rows along `i` (PA) or `j` (LL) and columns along `k`.
pub fn project_image(mu: &Volume, view: View) -> Result<Projection> {
    if let Some((index, &value)) = mu.data().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeAttenuation { index, value });
    }
    let [h, w, d] = mu.dims();
    let data = mu.data();
    let spacing = mu.spacing();
    let raster = match view {
        View::Pa => {
            let mut out = vec![0.0; h * d];
            out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
                for j in 0..w {
                    let src = &data[(i * w + j) * d..(i * w + j + 1) * d];
                    row.iter_mut().zip(src).for_each(|(acc, v)| *acc += v);
                }
                row.iter_mut().for_each(|v| *v *= spacing.sy);
            });
            Raster::new(d, h, out)?
        }
        View::Ll => {
            let mut out = vec![0.0; w * d];
            out.par_chunks_mut(d).enumerate().for_each(|(j, row)| {
                for i in 0..h {
                    let src = &data[(i * w + j) * d..(i * w + j + 1) * d];
                    row.iter_mut().zip(src).for_each(|(acc, v)| *acc += v);
                }
                row.iter_mut().for_each(|v| *v *= spacing.sx);
            });
            Raster::new(d, w, out)?
        }
    };
    Projection::new(view, raw_pixel_spacing(spacing, view), false, raster)
}

/// Ray-occupancy footprint of a label volume. Uses the label's own spacing
/// when present, unit spacing otherwise.
pub fn project_mask(m: &LabelVolume, view: View) -> Mask2D {
    let [h, w, d] = m.dims();
    let data = m.data();
    let (rows, outer) = match view {
        View::Pa => (h, w),
        View::Ll => (w, h),
    };
    let mut out = vec![0u8; rows * d];
    out.par_chunks_mut(d).enumerate().for_each(|(r, row)| {
        for o in 0..outer {
            let (i, j) = match view {
                View::Pa => (r, o),
                View::Ll => (o, r),
            };
            let src = &data[(i * w + j) * d..(i * w + j + 1) * d];
            row.iter_mut().zip(src).for_each(|(acc, &v)| *acc |= v);
        }
    });
    let spacing = m
        .spacing()
        .map(|s| raw_pixel_spacing(s, view))
        .unwrap_or(PixelSpacing::UNIT);
    Mask2D::new(view, m.label_id(), Raster::new(d, rows, out).expect("non-empty dims"))
        .expect("binary input gives binary footprint")
        .with_spacing(spacing)
}

/// Target raster size so that each axis has `target` millimetre pixels.
fn isotropic_size(width: usize, height: usize, s: PixelSpacing, target: f64) -> Result<(usize, usize)> {
    let w = (width as f64 * s.x / target).round();
    let h = (height as f64 * s.y / target).round();
    if w < 1.0 || h < 1.0 {
        return Err(Error::DegenerateImage(format!(
            "{width}x{height} px at {:.4}x{:.4} mm resamples to {w}x{h} at {target} mm",
            s.x, s.y
        )));
    }
    Ok((w as usize, h as usize))
}

fn rescaled_spacing(before: (usize, usize), after: (usize, usize), s: PixelSpacing) -> PixelSpacing {
    PixelSpacing {
        x: s.x * before.0 as f64 / after.0 as f64,
        y: s.y * before.1 as f64 / after.1 as f64,
    }
}

/// Resample a grayscale projection to isotropic pixels, orient it, then
/// apply the optional final resize. All steps use bilinear interpolation.
pub fn resample_projection(p: &Projection, cfg: &ProjectionConfig) -> Result<Projection> {
    cfg.validate()?;
    let (w, h) = isotropic_size(p.width(), p.height(), p.pixel_spacing, cfg.target_pixel_spacing)?;
    let iso = resize_bilinear(&p.raster, w, h);
    let mut spacing = rescaled_spacing(p.raster.size(), (w, h), p.pixel_spacing);
    let (mut raster, s) = cfg.orientation.apply(p.view, &iso, spacing);
    spacing = s;
    if let Some([ow, oh]) = cfg.output_size {
        spacing = rescaled_spacing(raster.size(), (ow, oh), spacing);
        raster = resize_bilinear(&raster, ow, oh);
    }
    Ok(Projection {
        view: p.view,
        pixel_spacing: spacing,
        normalized: false,
        raster,
    })
}

fn rebinarize(r: Raster<u8>) -> Raster<u8> {
    r.map(|v| u8::from(f64::from(v) >= 0.5))
}

/// Mask counterpart of [`resample_projection`] using nearest-neighbour
/// sampling and re-binarization.
pub fn resample_mask(m: &Mask2D, cfg: &ProjectionConfig) -> Result<Mask2D> {
    cfg.validate()?;
    let (w, h) = isotropic_size(m.width(), m.height(), m.pixel_spacing, cfg.target_pixel_spacing)?;
    let iso = rebinarize(resize_nearest(m.raster(), w, h));
    let mut spacing = rescaled_spacing(m.size(), (w, h), m.pixel_spacing);
    let (mut raster, s) = cfg.orientation.apply(m.view, &iso, spacing);
    spacing = s;
    if let Some([ow, oh]) = cfg.output_size {
        spacing = rescaled_spacing(raster.size(), (ow, oh), spacing);
        raster = rebinarize(resize_nearest(&raster, ow, oh));
    }
    Ok(m.with_raster(raster).with_spacing(spacing))
}

/// Image-wise min-max stretch to integers in `[0, 255]`, rounding half up.
///
/// A constant image has no defined stretch and maps to all zeros.
pub fn normalize_to_8bit(p: &Projection) -> Projection {
    let (min, max) = p
        .raster
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let raster = if max > min {
        let range = max - min;
        p.raster
            .map(|v| (255.0 * (v - min) / range + 0.5).floor().clamp(0.0, 255.0))
    } else {
        log::warn!("{} projection is constant ({min}); normalizing to zeros", p.view);
        p.raster.map(|_| 0.0)
    };
    Projection {
        view: p.view,
        pixel_spacing: p.pixel_spacing,
        normalized: true,
        raster,
    }
}

/// Per-view outputs of [`project_study`]; masks follow the label order.
#[derive(Debug, Clone)]
pub struct ViewProjection {
    pub view: View,
    pub image: Projection,
    pub masks: Vec<Mask2D>,
}

/// Full pipeline: images and co-registered footprints for every configured view.
pub fn project_study(volume: &Volume, labels: &[LabelVolume], cfg: &ProjectionConfig) -> Result<Vec<ViewProjection>> {
    cfg.validate()?;
    for l in labels {
        l.ensure_matches(volume)?;
    }
    let mu = attenuation_transform(volume);
    cfg.views
        .iter()
        .map(|&view| {
            let raw = project_image(&mu, view)?;
            let image = normalize_to_8bit(&resample_projection(&raw, cfg)?);
            let spacing = raw_pixel_spacing(volume.spacing(), view);
            let masks = labels
                .par_iter()
                .map(|l| resample_mask(&project_mask(l, view).with_spacing(spacing), cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(ViewProjection { view, image, masks })
        })
        .collect()
}
