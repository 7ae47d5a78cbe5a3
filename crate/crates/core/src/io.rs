//! On-disk formats.
//!
//! Volumes are stored as a JSON sidecar plus a raw little-endian payload:
//!
//! ```text
//! scan.json  {"dims": [H, W, D], "spacing_mm": [sx, sy, sz], "dtype": "i16"}
//! scan.raw   H*W*D little-endian i16 values, k fastest
//! ```
//!
//! Label volumes use the same layout with `"dtype": "u8"`; their `spacing_mm`
//! is optional. Projections and masks are binary PGM (`P5`, maxval 255).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Mask2D, PixelSpacing, Projection, Raster, View};
use crate::volume::{LabelVolume, Spacing, Volume};

const DTYPE_I16: &str = "i16";
const DTYPE_U8: &str = "u8";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    dims: [usize; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing_mm: Option<[f64; 3]>,
    dtype: String,
}

/// Returns the `(sidecar, payload)` pair for a volume path given with or
/// without its `.json` extension.
pub fn volume_paths(path: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let path = path.as_ref();
    (path.with_extension("json"), path.with_extension("raw"))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_sidecar(path: &Path, dtype: &'static str) -> Result<Sidecar> {
    let bytes = read(path)?;
    let sidecar: Sidecar = serde_json::from_slice(&bytes).map_err(|source| Error::Sidecar {
        path: path.to_owned(),
        source,
    })?;
    if sidecar.dtype != dtype {
        return Err(Error::UnsupportedDtype {
            expected: dtype,
            found: sidecar.dtype,
        });
    }
    if sidecar.dims.contains(&0) {
        return Err(Error::InvalidDims(sidecar.dims.to_vec()));
    }
    Ok(sidecar)
}

fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let mut text = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    text.push('\n');
    write(path, text.as_bytes())
}

fn expect_len(dims: [usize; 3], elem: usize, actual: usize) -> Result<()> {
    let expected = dims.iter().product::<usize>() * elem;
    if expected != actual {
        return Err(Error::SizeMismatch { expected, actual });
    }
    Ok(())
}

pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let (json, raw) = volume_paths(path);
    let sidecar = read_sidecar(&json, DTYPE_I16)?;
    let spacing = sidecar
        .spacing_mm
        .ok_or_else(|| Error::InvalidArgument(format!("{} lacks spacing_mm", json.display())))
        .and_then(Spacing::try_from)?;
    let bytes = read(&raw)?;
    expect_len(sidecar.dims, 2, bytes.len())?;
    let data = bytes
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64)
        .collect();
    Volume::new(sidecar.dims, spacing, data)
}

/// Writes a volume as i16. Every voxel must hold an integer in the i16 range.
pub fn save_volume(volume: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let (json, raw) = volume_paths(path);
    let mut bytes = Vec::with_capacity(volume.data().len() * 2);
    for (index, &v) in volume.data().iter().enumerate() {
        if v.fract() != 0.0 || v < i16::MIN as f64 || v > i16::MAX as f64 {
            return Err(Error::NotRepresentable {
                index,
                value: v,
                dtype: DTYPE_I16,
            });
        }
        bytes.extend_from_slice(&(v as i16).to_le_bytes());
    }
    write_sidecar(
        &json,
        &Sidecar {
            dims: volume.dims(),
            spacing_mm: Some(volume.spacing().as_array()),
            dtype: DTYPE_I16.to_owned(),
        },
    )?;
    write(&raw, &bytes)
}

pub fn load_label_volume(path: impl AsRef<Path>, label_id: u32) -> Result<LabelVolume> {
    let (json, raw) = volume_paths(path);
    let sidecar = read_sidecar(&json, DTYPE_U8)?;
    let spacing = sidecar.spacing_mm.map(Spacing::try_from).transpose()?;
    let bytes = read(&raw)?;
    expect_len(sidecar.dims, 1, bytes.len())?;
    LabelVolume::new(label_id, sidecar.dims, bytes)?.with_spacing(spacing)
}

pub fn save_label_volume(labels: &LabelVolume, path: impl AsRef<Path>) -> Result<()> {
    let (json, raw) = volume_paths(path);
    write_sidecar(
        &json,
        &Sidecar {
            dims: labels.dims(),
            spacing_mm: labels.spacing().map(|s| s.as_array()),
            dtype: DTYPE_U8.to_owned(),
        },
    )?;
    write(&raw, labels.data())
}

/// Encodes an 8-bit grayscale raster as binary PGM.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Decodes a binary PGM with maxval <= 255, returning `(width, height, pixels)`.
///
/// Comments are accepted in the header. The payload must have exactly
/// `width * height` bytes.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, u8, Vec<u8>)> {
    let mut pos = 0usize;
    let magic = bytes.get(0..2).ok_or_else(|| Error::Pgm("truncated header".into()))?;
    if magic != b"P5" {
        return Err(Error::Pgm("missing P5 magic".into()));
    }
    pos += 2;

    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::Pgm("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pgm(format!("expected a number at byte {start}")));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm("header number out of range".into()))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Pgm("missing whitespace after maxval".into())),
    }

    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::Pgm(format!("zero extent {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("unsupported maxval {maxval}")));
    }
    let payload = &bytes[pos..];
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("extent overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: payload.len(),
        });
    }
    Ok((width, height, maxval as u8, payload.to_vec()))
}

pub fn save_projection(p: &Projection, path: impl AsRef<Path>) -> Result<()> {
    let pixels = p.to_bytes()?;
    write(path.as_ref(), &encode_pgm(p.width(), p.height(), &pixels))
}

/// Loads an 8-bit projection. The PGM carries no geometry, so view and
/// spacing are supplied by the caller.
pub fn load_projection(path: impl AsRef<Path>, view: View, pixel_spacing: PixelSpacing) -> Result<Projection> {
    let path = path.as_ref();
    let (w, h, maxval, pixels) = decode_pgm(&read(path)?)?;
    if maxval != 255 {
        return Err(Error::Pgm(format!("projection maxval must be 255, found {maxval}")));
    }
    let raster = Raster::new(w, h, pixels.into_iter().map(f64::from).collect())?;
    Projection::new(view, pixel_spacing, true, raster)
}

/// Writes foreground as 255 and background as 0.
pub fn save_mask2d(m: &Mask2D, path: impl AsRef<Path>) -> Result<()> {
    let pixels: Vec<u8> = m
        .raster()
        .data()
        .iter()
        .map(|&v| if v != 0 { 255 } else { 0 })
        .collect();
    write(path.as_ref(), &encode_pgm(m.width(), m.height(), &pixels))
}

/// Loads a mask; any nonzero byte is foreground. Spacing defaults to 1 mm.
pub fn load_mask2d(path: impl AsRef<Path>, view: View, label_id: u32) -> Result<Mask2D> {
    let path = path.as_ref();
    let (w, h, _, pixels) = decode_pgm(&read(path)?)?;
    let raster = Raster::new(w, h, pixels.into_iter().map(|v| u8::from(v != 0)).collect())?;
    Mask2D::new(view, label_id, raster)
}
