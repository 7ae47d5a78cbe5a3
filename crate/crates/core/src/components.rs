//! Connected-component labelling of binary masks.

use crate::image::{Mask2D, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
            Connectivity::Eight => &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)],
        }
    }
}

/// Label image plus per-component pixel counts.
///
/// Label 0 is background; components are numbered from 1 in the raster
/// order of their first pixel.
#[derive(Debug, Clone)]
pub struct Components {
    pub labels: Raster<u32>,
    /// `areas[l - 1]` is the pixel count of label `l`.
    pub areas: Vec<usize>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    /// Area of the biggest component, 0 when there is none.
    pub fn largest(&self) -> usize {
        self.areas.iter().copied().max().unwrap_or(0)
    }
}

/// Flood-fill labelling with an explicit stack.
pub fn label_components(mask: &Mask2D, connectivity: Connectivity) -> Components {
    let (w, h) = mask.size();
    let src = mask.raster().data();
    let mut labels = vec![0u32; w * h];
    let mut areas = Vec::new();
    let mut stack = Vec::new();
    for seed in 0..w * h {
        if src[seed] == 0 || labels[seed] != 0 {
            continue;
        }
        let label = areas.len() as u32 + 1;
        labels[seed] = label;
        stack.push(seed);
        let mut area = 0usize;
        while let Some(p) = stack.pop() {
            area += 1;
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let q = ny as usize * w + nx as usize;
                if src[q] != 0 && labels[q] == 0 {
                    labels[q] = label;
                    stack.push(q);
                }
            }
        }
        areas.push(area);
    }
    Components {
        labels: Raster::new(w, h, labels).expect("same geometry as mask"),
        areas,
    }
}
