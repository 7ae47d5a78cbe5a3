//! 2D rasters: radiographic projections and anatomy footprints.
//!
//! Rasters are row-major with the origin at the top-left: `x` indexes columns
//! (rightward) and `y` indexes rows (downward).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radiographic view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum View {
    /// Postero-anterior (frontal); rays run along the volume's `j` axis.
    #[serde(rename = "PA")]
    Pa,
    /// Lateral; rays run along the volume's `i` axis.
    #[serde(rename = "LL")]
    Ll,
}

impl View {
    pub const ALL: [View; 2] = [View::Pa, View::Ll];

    pub fn as_str(&self) -> &'static str {
        match self {
            View::Pa => "PA",
            View::Ll => "LL",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PA" => Ok(View::Pa),
            "LL" | "LAT" => Ok(View::Ll),
            _ => Err(Error::InvalidArgument(format!("unknown view {s:?}, expected PA or LL"))),
        }
    }
}

/// Physical pixel size in millimetres: `x` along columns, `y` along rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelSpacing {
    pub x: f64,
    pub y: f64,
}

impl PixelSpacing {
    pub const UNIT: PixelSpacing = PixelSpacing { x: 1.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0 {
            Ok(PixelSpacing { x, y })
        } else {
            Err(Error::InvalidSpacing([x, y, 1.0]))
        }
    }

    pub fn swapped(self) -> Self {
        PixelSpacing { x: self.y, y: self.x }
    }
}

/// A dense row-major 2D grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Raster<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDims(vec![width, height]));
        }
        if data.len() != width * height {
            return Err(Error::SizeMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Raster { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.get(x, y));
            }
        }
        Raster {
            width: self.height,
            height: self.width,
            data,
        }
    }

    /// Mirrors top-to-bottom.
    pub fn flip_vertical(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for y in (0..self.height).rev() {
            data.extend_from_slice(self.row(y));
        }
        Raster { data, ..*self }
    }

    /// Mirrors left-to-right.
    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            data.extend(self.row(y).iter().rev());
        }
        Raster { data, ..*self }
    }
}

impl<T> Raster<T> {
    fn same_size<U>(&self, other: &Raster<U>) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::GeometryMismatch {
                expected: (self.width, self.height),
                actual: (other.width, other.height),
            });
        }
        Ok(())
    }
}

/// A radiographic image: raw line integrals or an 8-bit normalized rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub view: View,
    pub pixel_spacing: PixelSpacing,
    pub normalized: bool,
    pub raster: Raster<f64>,
}

impl Projection {
    pub fn new(view: View, pixel_spacing: PixelSpacing, normalized: bool, raster: Raster<f64>) -> Result<Self> {
        for (index, &v) in raster.data().iter().enumerate() {
            let ok = if normalized {
                (0.0..=255.0).contains(&v) && v.fract() == 0.0
            } else {
                v.is_finite() && v >= 0.0
            };
            if !ok {
                return Err(if v.is_finite() {
                    Error::NotRepresentable {
                        index,
                        value: v,
                        dtype: if normalized {
                            "u8 pixel"
                        } else {
                            "non-negative line integral"
                        },
                    }
                } else {
                    Error::NonFinite { index }
                });
            }
        }
        Ok(Projection {
            view,
            pixel_spacing,
            normalized,
            raster,
        })
    }

    pub fn width(&self) -> usize {
        self.raster.width()
    }

    pub fn height(&self) -> usize {
        self.raster.height()
    }

    /// Pixel values as bytes; only meaningful for normalized projections.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if !self.normalized {
            return Err(Error::NotNormalized);
        }
        Ok(self.raster.data().iter().map(|&v| v as u8).collect())
    }
}

/// A binary anatomy footprint in one view.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask2D {
    pub view: View,
    pub label_id: u32,
    pub pixel_spacing: PixelSpacing,
    raster: Raster<u8>,
}

impl Mask2D {
    pub fn new(view: View, label_id: u32, raster: Raster<u8>) -> Result<Self> {
        if let Some(index) = raster.data().iter().position(|&v| v > 1) {
            return Err(Error::NotBinary {
                index,
                value: raster.data()[index] as f64,
            });
        }
        Ok(Mask2D {
            view,
            label_id,
            pixel_spacing: PixelSpacing::UNIT,
            raster,
        })
    }

    pub fn with_spacing(mut self, pixel_spacing: PixelSpacing) -> Self {
        self.pixel_spacing = pixel_spacing;
        self
    }

    /// An all-background mask.
    pub fn empty(view: View, label_id: u32, width: usize, height: usize) -> Result<Self> {
        Self::new(view, label_id, Raster::filled(width, height, 0)?)
    }

    /// Builds a mask from a predicate over `(x, y)`.
    pub fn from_fn(
        view: View,
        label_id: u32,
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        Self::new(
            view,
            label_id,
            Raster::from_fn(width, height, |x, y| u8::from(f(x, y)))?,
        )
    }

    pub fn raster(&self) -> &Raster<u8> {
        &self.raster
    }

    pub fn width(&self) -> usize {
        self.raster.width()
    }

    pub fn height(&self) -> usize {
        self.raster.height()
    }

    pub fn size(&self) -> (usize, usize) {
        self.raster.size()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.raster.get(x, y) != 0
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.raster.set(x, y, u8::from(v));
    }

    pub fn count(&self) -> usize {
        self.raster.data().iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.raster.data().iter().all(|&v| v == 0)
    }

    /// Foreground pixel coordinates in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width();
        self.raster
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(idx, _)| (idx % w, idx / w))
    }

    pub fn ensure_same_size(&self, other: &Mask2D) -> Result<()> {
        self.raster.same_size(&other.raster)
    }

    /// Pixelwise OR; geometries must agree.
    pub fn union(&self, other: &Mask2D) -> Result<Mask2D> {
        self.ensure_same_size(other)?;
        let data = self
            .raster
            .data()
            .iter()
            .zip(other.raster.data())
            .map(|(&a, &b)| a | b)
            .collect();
        Ok(Mask2D {
            raster: Raster::new(self.width(), self.height(), data)?,
            ..self.clone()
        })
    }

    pub(crate) fn with_raster(&self, raster: Raster<u8>) -> Mask2D {
        Mask2D { raster, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_transforms() {
        let r = Raster::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(r.transpose().data(), &[1, 4, 2, 5, 3, 6]);
        assert_eq!(r.transpose().size(), (2, 3));
        assert_eq!(r.flip_vertical().data(), &[4, 5, 6, 1, 2, 3]);
        assert_eq!(r.flip_horizontal().data(), &[3, 2, 1, 6, 5, 4]);
        assert_eq!(r.transpose().transpose(), r);
    }

    #[test]
    fn projection_validation() {
        let r = Raster::new(2, 1, vec![0.0, 255.5]).unwrap();
        assert!(Projection::new(View::Pa, PixelSpacing::UNIT, true, r.clone()).is_err());
        assert!(Projection::new(View::Pa, PixelSpacing::UNIT, false, r).is_ok());
        let neg = Raster::new(1, 1, vec![-1.0]).unwrap();
        assert!(Projection::new(View::Pa, PixelSpacing::UNIT, false, neg).is_err());
    }

    #[test]
    fn view_parsing() {
        assert_eq!("pa".parse::<View>().unwrap(), View::Pa);
        assert_eq!("LL".parse::<View>().unwrap(), View::Ll);
        assert!("AP".parse::<View>().is_err());
        assert_eq!(serde_json::to_string(&View::Ll).unwrap(), "\"LL\"");
    }
}
