//! Digitally reconstructed radiographs from CT volumes, anatomical
//! projection masks, rule-based chest measurements, segmentation metrics
//! and the statistics used to compare models.

pub mod components;
pub mod error;
pub mod image;
pub mod io;
pub mod measurement;
pub mod metrics;
pub mod phantom;
pub mod projection;
pub mod stats;
pub mod volume;

pub use error::{Error, Result};
pub use image::{Mask2D, PixelSpacing, Projection, Raster, View};
pub use volume::{LabelVolume, Spacing, Volume};
