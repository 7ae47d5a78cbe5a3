//! Raster resizing.
//!
//! Pixel centres sit at integer coordinates. Output pixel `u` of an axis
//! resized from `n_in` to `n_out` samples the input at
//! `(u + 0.5) * n_in / n_out - 0.5`; coordinates outside `[0, n_in - 1]`
//! are clamped to the edge.

use serde::{Deserialize, Serialize};

use crate::image::Raster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Bilinear,
    Nearest,
}

#[inline]
fn source_coord(u: usize, scale: f64) -> f64 {
    (u as f64 + 0.5) * scale - 0.5
}

/// Per-output-sample `(lower index, upper index, upper weight)`.
fn linear_taps(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    let scale = n_in as f64 / n_out as f64;
    let max = (n_in - 1) as f64;
    (0..n_out)
        .map(|u| {
            let c = source_coord(u, scale).clamp(0.0, max);
            let i0 = c.floor() as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            (i0, i1, c - i0 as f64)
        })
        .collect()
}

fn nearest_taps(n_in: usize, n_out: usize) -> Vec<usize> {
    let scale = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|u| (((u as f64 + 0.5) * scale).floor() as usize).min(n_in - 1))
        .collect()
}

pub fn resize_bilinear(src: &Raster<f64>, width: usize, height: usize) -> Raster<f64> {
    if src.size() == (width, height) {
        return src.clone();
    }
    let xs = linear_taps(src.width(), width);
    let ys = linear_taps(src.height(), height);
    let mut data = Vec::with_capacity(width * height);
    for &(y0, y1, fy) in &ys {
        let r0 = src.row(y0);
        let r1 = src.row(y1);
        for &(x0, x1, fx) in &xs {
            let top = r0[x0] * (1.0 - fx) + r0[x1] * fx;
            let bottom = r1[x0] * (1.0 - fx) + r1[x1] * fx;
            data.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    Raster::new(width, height, data).expect("non-empty target")
}

pub fn resize_nearest<T: Copy>(src: &Raster<T>, width: usize, height: usize) -> Raster<T> {
    if src.size() == (width, height) {
        return src.clone();
    }
    let xs = nearest_taps(src.width(), width);
    let ys = nearest_taps(src.height(), height);
    let mut data = Vec::with_capacity(width * height);
    for &y in &ys {
        let row = src.row(y);
        data.extend(xs.iter().map(|&x| row[x]));
    }
    Raster::new(width, height, data).expect("non-empty target")
}
