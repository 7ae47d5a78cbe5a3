//! View-specific reorientation by transposes, flips and quarter turns.

use serde::{Deserialize, Serialize};

use crate::image::{PixelSpacing, Raster, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientOp {
    /// Swap rows and columns.
    Transpose,
    /// Mirror top-to-bottom.
    FlipVertical,
    /// Mirror left-to-right.
    FlipHorizontal,
    /// Quarter turn clockwise.
    Rotate90,
}

impl OrientOp {
    pub fn apply<T: Copy>(self, r: &Raster<T>) -> Raster<T> {
        match self {
            OrientOp::Transpose => r.transpose(),
            OrientOp::FlipVertical => r.flip_vertical(),
            OrientOp::FlipHorizontal => r.flip_horizontal(),
            OrientOp::Rotate90 => r.transpose().flip_horizontal(),
        }
    }

    pub fn apply_spacing(self, s: PixelSpacing) -> PixelSpacing {
        match self {
            OrientOp::Transpose | OrientOp::Rotate90 => s.swapped(),
            OrientOp::FlipVertical | OrientOp::FlipHorizontal => s,
        }
    }
}

/// Per-view op sequences mapping raw projections to display orientation.
///
/// Raw projections have rows along the volume's first retained axis (`i`
/// for PA, `j` for LL) and columns along `k`. The defaults assume RAS+ index
/// order (`i` toward patient right, `j` toward anterior, `k` toward
/// superior) and produce head-up images with the patient's left on the
/// image right (PA) and anterior on the image left (LL).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orientation {
    #[serde(rename = "PA")]
    pub pa: Vec<OrientOp>,
    #[serde(rename = "LL")]
    pub ll: Vec<OrientOp>,
}

impl Default for Orientation {
    fn default() -> Self {
        let ops = vec![OrientOp::Transpose, OrientOp::FlipVertical, OrientOp::FlipHorizontal];
        Orientation {
            pa: ops.clone(),
            ll: ops,
        }
    }
}

impl Orientation {
    /// Leaves raw projections untouched.
    pub fn identity() -> Self {
        Orientation {
            pa: Vec::new(),
            ll: Vec::new(),
        }
    }

    pub fn ops(&self, view: View) -> &[OrientOp] {
        match view {
            View::Pa => &self.pa,
            View::Ll => &self.ll,
        }
    }

    pub fn apply<T: Copy>(&self, view: View, r: &Raster<T>, s: PixelSpacing) -> (Raster<T>, PixelSpacing) {
        self.ops(view)
            .iter()
            .fold((r.clone(), s), |(r, s), op| (op.apply(&r), op.apply_spacing(s)))
    }
}
