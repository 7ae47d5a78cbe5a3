//! Small synthetic chest study for tests and demonstrations.
//!
//! Axes follow RAS+ index order: `i` runs right to left across the body,
//! `j` posterior to anterior and `k` inferior to superior.

use crate::volume::{LabelVolume, Spacing, Volume};

pub const BODY: u32 = 1;
pub const LUNG_A: u32 = 2;
pub const LUNG_B: u32 = 3;
pub const HEART: u32 = 4;
/// Vertebra label ids, inferior first.
pub const VERTEBRAE: [u32; 5] = [10, 11, 12, 13, 14];

const DIMS: [usize; 3] = [16, 16, 16];

#[derive(Debug, Clone)]
pub struct Phantom {
    pub volume: Volume,
    pub labels: Vec<LabelVolume>,
}

fn in_body(i: usize, j: usize) -> bool {
    let (x, y) = ((i as f64 - 7.5) / 7.0, (j as f64 - 7.5) / 6.0);
    x * x + y * y <= 1.0
}

fn in_lung_a(i: usize, j: usize, k: usize) -> bool {
    (2..6).contains(&i) && (4..12).contains(&j) && (3..15).contains(&k)
}

fn in_lung_b(i: usize, j: usize, k: usize) -> bool {
    (9..14).contains(&i) && (4..12).contains(&j) && (3..15).contains(&k)
}

fn in_heart(i: usize, j: usize, k: usize) -> bool {
    (6..11).contains(&i) && (8..13).contains(&j) && (3..8).contains(&k)
}

/// Index of the vertebra containing the voxel, if any.
fn vertebra(i: usize, j: usize, k: usize) -> Option<usize> {
    if !(6..9).contains(&i) || !(2..5).contains(&j) {
        return None;
    }
    // two slices per vertebra with one-slice gaps: k = 1,2 / 4,5 / ... / 13,14
    (k >= 1 && !k.is_multiple_of(3))
        .then(|| (k - 1) / 3)
        .filter(|&v| v < VERTEBRAE.len())
}

/// 16^3 study with anisotropic spacing `(1, 1, 2)` mm: body, two lungs,
/// heart and five vertebrae stacked along a straight spine.
pub fn chest_phantom() -> Phantom {
    let spacing = Spacing::new(1.0, 1.0, 2.0).expect("valid spacing");
    let volume = Volume::from_fn(DIMS, spacing, |i, j, k| {
        if vertebra(i, j, k).is_some() {
            700.0
        } else if in_heart(i, j, k) {
            40.0
        } else if in_lung_a(i, j, k) || in_lung_b(i, j, k) {
            -800.0
        } else if in_body(i, j) {
            0.0
        } else {
            -1000.0
        }
    })
    .expect("valid volume");

    let mut labels = vec![
        LabelVolume::from_fn(BODY, DIMS, |i, j, _| in_body(i, j)),
        LabelVolume::from_fn(LUNG_A, DIMS, in_lung_a),
        LabelVolume::from_fn(LUNG_B, DIMS, in_lung_b),
        LabelVolume::from_fn(HEART, DIMS, in_heart),
    ];
    for (v, &id) in VERTEBRAE.iter().enumerate() {
        labels.push(LabelVolume::from_fn(id, DIMS, move |i, j, k| {
            vertebra(i, j, k) == Some(v)
        }));
    }
    let labels = labels
        .into_iter()
        .map(|l| {
            l.expect("valid labels")
                .with_spacing(Some(spacing))
                .expect("matching spacing")
        })
        .collect();
    Phantom { volume, labels }
}
