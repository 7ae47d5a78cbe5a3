//! Smooth spine curve through ordered vertebral centroids.
//!
//! The curve is represented by its tangent angle as a function of
//! normalized arc position `t` in `[0, 1]`. Each chord between consecutive
//! centroids contributes its direction as a sample at the chord's midpoint
//! position; a least-squares quadratic in `t` is fitted to those samples.
//! Positions follow by integrating the unit tangent. A constant angle gives
//! a straight line and a linear angle gives a circular arc, so both are
//! reproduced exactly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Sub-pixel point in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
}

impl Centroid {
    pub fn new(x: f64, y: f64) -> Self {
        Centroid { x, y }
    }
}

/// Sorts by `y`, breaking ties on `x`.
pub fn sort_superior_to_inferior(points: &mut [Centroid]) {
    points.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpineCurve {
    centroids: Vec<Centroid>,
    knots: Vec<f64>,
    length: f64,
    /// Tangent angle `a + b t + c t^2`, radians, measured from +x toward +y.
    coeffs: [f64; 3],
    origin: Centroid,
}

const SIMPSON_STEPS: usize = 64;

impl SpineCurve {
    /// Fits a curve through centroids ordered superior to inferior.
    ///
    /// Returns `None` for fewer than three points or a zero-length chord.
    pub fn fit(ordered: &[Centroid]) -> Option<SpineCurve> {
        if ordered.len() < 3 {
            return None;
        }
        let chords: Vec<(f64, f64)> = ordered.windows(2).map(|w| (w[1].x - w[0].x, w[1].y - w[0].y)).collect();
        let lengths: Vec<f64> = chords.iter().map(|(dx, dy)| dx.hypot(*dy)).collect();
        if lengths.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return None;
        }
        let length: f64 = lengths.iter().sum();
        let mut knots = Vec::with_capacity(ordered.len());
        let mut acc = 0.0;
        knots.push(0.0);
        for l in &lengths {
            acc += l;
            knots.push(acc / length);
        }
        *knots.last_mut().unwrap() = 1.0;

        // unwrap chord angles so consecutive samples differ by less than pi
        let mut angles = Vec::with_capacity(chords.len());
        for &(dx, dy) in &chords {
            let mut a = dy.atan2(dx);
            if let Some(&prev) = angles.last() {
                while a - prev > std::f64::consts::PI {
                    a -= std::f64::consts::TAU;
                }
                while a - prev < -std::f64::consts::PI {
                    a += std::f64::consts::TAU;
                }
            }
            angles.push(a);
        }
        let mids: Vec<f64> = knots.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

        let degree = (mids.len() - 1).min(2);
        let design = DMatrix::from_fn(mids.len(), degree + 1, |r, c| mids[r].powi(c as i32));
        let rhs = DVector::from_column_slice(&angles);
        let sol = design.svd(true, true).solve(&rhs, 1e-12).ok()?;
        let mut coeffs = [0.0; 3];
        for (c, v) in coeffs.iter_mut().zip(sol.iter()) {
            *c = *v;
        }

        let mut curve = SpineCurve {
            centroids: ordered.to_vec(),
            knots,
            length,
            coeffs,
            origin: ordered[0],
        };
        // place the curve so that it best matches the centroids in least squares
        let n = ordered.len() as f64;
        let (mut ox, mut oy) = (0.0, 0.0);
        for (c, &t) in ordered.iter().zip(&curve.knots) {
            let (ix, iy) = curve.integral(t);
            ox += c.x - length * ix;
            oy += c.y - length * iy;
        }
        curve.origin = Centroid::new(ox / n, oy / n);
        Some(curve)
    }

    pub fn centroids(&self) -> &[Centroid] {
        &self.centroids
    }

    /// Normalized arc position of each centroid.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn angle_coefficients(&self) -> [f64; 3] {
        self.coeffs
    }

    /// Tangent angle in radians.
    pub fn tangent_angle(&self, t: f64) -> f64 {
        let [a, b, c] = self.coeffs;
        a + t * (b + t * c)
    }

    /// Unit tangent, oriented from superior to inferior.
    pub fn tangent(&self, t: f64) -> [f64; 2] {
        let a = self.tangent_angle(t);
        [a.cos(), a.sin()]
    }

    pub fn position(&self, t: f64) -> Centroid {
        let (ix, iy) = self.integral(t);
        Centroid::new(self.origin.x + self.length * ix, self.origin.y + self.length * iy)
    }

    /// Composite Simpson estimate of the integral of the unit tangent over `[0, t]`.
    fn integral(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (0.0, 0.0);
        }
        let h = t / SIMPSON_STEPS as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        for s in 0..=SIMPSON_STEPS {
            let w = match s {
                0 => 1.0,
                s if s == SIMPSON_STEPS => 1.0,
                s if s % 2 == 1 => 4.0,
                _ => 2.0,
            };
            let [tx, ty] = self.tangent(s as f64 * h);
            sx += w * tx;
            sy += w * ty;
        }
        (sx * h / 3.0, sy * h / 3.0)
    }
}

/// Angle between two direction vectors in degrees, in `[0, 180]`.
pub fn angle_between_deg(u: [f64; 2], v: [f64; 2]) -> f64 {
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.abs().atan2(dot).to_degrees()
}
