//! In-memory 3D grids: CT intensity volumes and binary label volumes.
//!
//! Voxel `(i, j, k)` of a grid with dims `[h, w, d]` lives at linear index
//! `(i * w + j) * d + k`, so `k` is the fastest-varying axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical voxel size in millimetres along the `i`, `j` and `k` axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl Spacing {
    pub fn new(sx: f64, sy: f64, sz: f64) -> Result<Self> {
        let s = Spacing { sx, sy, sz };
        s.validate()?;
        Ok(s)
    }

    pub fn isotropic(s: f64) -> Result<Self> {
        Self::new(s, s, s)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sx, self.sy, self.sz]
    }

    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidSpacing(self.as_array()))
        }
    }
}

impl TryFrom<[f64; 3]> for Spacing {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Spacing::new(v[0], v[1], v[2])
    }
}

#[inline]
pub(crate) fn linear_index(dims: [usize; 3], i: usize, j: usize, k: usize) -> usize {
    (i * dims[1] + j) * dims[2] + k
}

fn check_dims(dims: [usize; 3], len: usize) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidDims(dims.to_vec()));
    }
    let expected = dims.iter().product::<usize>();
    if expected != len {
        return Err(Error::SizeMismatch { expected, actual: len });
    }
    Ok(())
}

/// A CT volume (or any derived scalar volume such as attenuation values).
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: Spacing,
    data: Vec<f64>,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: Spacing, data: Vec<f64>) -> Result<Self> {
        spacing.validate()?;
        check_dims(dims, data.len())?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Volume { dims, spacing, data })
    }

    /// Builds a volume by evaluating `f(i, j, k)` at every voxel.
    pub fn from_fn(dims: [usize; 3], spacing: Spacing, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[linear_index(self.dims, i, j, k)]
    }

    /// Applies `f` voxel-wise, keeping geometry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.dims, self.spacing, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn with_spacing(mut self, spacing: Spacing) -> Result<Self> {
        spacing.validate()?;
        self.spacing = spacing;
        Ok(self)
    }
}

/// Binary occupancy grid for a single anatomical structure.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    label_id: u32,
    dims: [usize; 3],
    spacing: Option<Spacing>,
    data: Vec<u8>,
}

impl LabelVolume {
    pub fn new(label_id: u32, dims: [usize; 3], data: Vec<u8>) -> Result<Self> {
        check_dims(dims, data.len())?;
        if let Some(index) = data.iter().position(|&v| v > 1) {
            return Err(Error::NotBinary {
                index,
                value: data[index] as f64,
            });
        }
        Ok(LabelVolume {
            label_id,
            dims,
            spacing: None,
            data,
        })
    }

    pub fn from_fn(label_id: u32, dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(u8::from(f(i, j, k)));
                }
            }
        }
        Self::new(label_id, dims, data)
    }

    pub fn label_id(&self) -> u32 {
        self.label_id
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Voxel spacing, when the label file declares one.
    pub fn spacing(&self) -> Option<Spacing> {
        self.spacing
    }

    pub fn with_spacing(mut self, spacing: Option<Spacing>) -> Result<Self> {
        if let Some(s) = &spacing {
            s.validate()?;
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[linear_index(self.dims, i, j, k)] != 0
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn ensure_matches(&self, volume: &Volume) -> Result<()> {
        if self.dims != volume.dims() {
            return Err(Error::DimsMismatch {
                expected: volume.dims(),
                actual: self.dims,
            });
        }
        match self.spacing {
            Some(s) if s != volume.spacing() => Err(Error::InvalidArgument(format!(
                "label {} spacing {:?} differs from volume spacing {:?}",
                self.label_id,
                s.as_array(),
                volume.spacing().as_array()
            ))),
            _ => Ok(()),
        }
    }
}
