//! Independent reference implementations used as test oracles.
//!
//! Everything here is written for clarity over speed and shares no code
//! with the library beyond its data types.
#![allow(dead_code)]

use drr_anatomy::{LabelVolume, Mask2D, Spacing, View, Volume};
use rand::rngs::StdRng;
use rand::Rng;

pub fn random_spacing(rng: &mut StdRng) -> Spacing {
    Spacing::new(
        rng.gen_range(0.3..3.0),
        rng.gen_range(0.3..3.0),
        rng.gen_range(0.3..3.0),
    )
    .unwrap()
}

pub fn random_dims(rng: &mut StdRng, max: usize) -> [usize; 3] {
    [rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max)]
}

/// Non-negative attenuation volume.
pub fn random_mu(rng: &mut StdRng, dims: [usize; 3], spacing: Spacing) -> Volume {
    Volume::from_fn(dims, spacing, |_, _, _| {
        if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.0..3.0)
        }
    })
    .unwrap()
}

pub fn random_labels(rng: &mut StdRng, id: u32, dims: [usize; 3], p: f64) -> LabelVolume {
    LabelVolume::from_fn(id, dims, |_, _, _| rng.gen_bool(p)).unwrap()
}

pub fn random_mask(rng: &mut StdRng, w: usize, h: usize, p: f64) -> Mask2D {
    Mask2D::from_fn(View::Pa, 1, w, h, |_, _| rng.gen_bool(p)).unwrap()
}

// ---------------------------------------------------------------- projection

/// Triple-loop line integral, returned as `[row][col]` with rows along the
/// kept in-plane axis and columns along `k`.
pub fn naive_projection(v: &Volume, view: View) -> Vec<Vec<f64>> {
    let [h, w, d] = v.dims();
    let s = v.spacing();
    match view {
        View::Pa => (0..h)
            .map(|i| {
                (0..d)
                    .map(|k| {
                        let mut sum = 0.0;
                        for j in 0..w {
                            sum += v.get(i, j, k);
                        }
                        sum * s.sy
                    })
                    .collect()
            })
            .collect(),
        View::Ll => (0..w)
            .map(|j| {
                (0..d)
                    .map(|k| {
                        let mut sum = 0.0;
                        for i in 0..h {
                            sum += v.get(i, j, k);
                        }
                        sum * s.sx
                    })
                    .collect()
            })
            .collect(),
    }
}

pub fn naive_footprint(m: &LabelVolume, view: View) -> Vec<Vec<bool>> {
    let [h, w, d] = m.dims();
    match view {
        View::Pa => (0..h)
            .map(|i| (0..d).map(|k| (0..w).any(|j| m.get(i, j, k))).collect())
            .collect(),
        View::Ll => (0..w)
            .map(|j| (0..d).map(|k| (0..h).any(|i| m.get(i, j, k))).collect())
            .collect(),
    }
}

// ---------------------------------------------------------------- components

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[a] = r;
        r
    }

    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// 8-connected components as lists of pixel indices `y * w + x`, ordered
/// by their first pixel.
pub fn components_union_find(m: &Mask2D) -> Vec<Vec<usize>> {
    let (w, h) = m.size();
    let mut uf = UnionFind((0..w * h).collect());
    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            for (dx, dy) in [(-1i64, -1i64), (0, -1), (1, -1), (-1, 0)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && m.get(nx as usize, ny as usize) {
                    uf.join(y * w + x, ny as usize * w + nx as usize);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for p in 0..w * h {
        if !m.get(p % w, p / w) {
            continue;
        }
        let r = uf.find(p);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(p),
            None => groups.push((r, vec![p])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

// ---------------------------------------------------------------- metrics

pub fn pixels(m: &Mask2D) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for y in 0..m.height() {
        for x in 0..m.width() {
            if m.get(x, y) {
                out.push((x as i64, y as i64));
            }
        }
    }
    out
}

pub fn boundary_pixels(m: &Mask2D) -> Vec<(i64, i64)> {
    let (w, h) = (m.width() as i64, m.height() as i64);
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && m.get(x as usize, y as usize);
    pixels(m)
        .into_iter()
        .filter(|&(x, y)| {
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|(dx, dy)| !inside(x + dx, y + dy))
        })
        .collect()
}

pub fn brute_overlap(p: &Mask2D, r: &Mask2D) -> (f64, f64) {
    let a = pixels(p);
    let b = pixels(r);
    if a.is_empty() && b.is_empty() {
        return (1.0, 1.0);
    }
    let inter = a.iter().filter(|q| b.contains(q)).count();
    let union = a.len() + b.len() - inter;
    (
        2.0 * inter as f64 / (a.len() + b.len()) as f64,
        inter as f64 / union as f64,
    )
}

fn min_dist(a: (i64, i64), set: &[(i64, i64)]) -> f64 {
    set.iter()
        .map(|&(x, y)| (((a.0 - x).pow(2) + (a.1 - y).pow(2)) as f64).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Nearest-rank-free percentile: linear interpolation between order statistics.
pub fn interp_percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    if lo + 1 >= v.len() {
        return v[lo];
    }
    v[lo] * (1.0 - (pos - lo as f64)) + v[lo + 1] * (pos - lo as f64)
}

/// `(hd95, asd, nsd)` by exhaustive pairwise distances; both masks non-empty.
pub fn brute_boundary(p: &Mask2D, r: &Mask2D, tol: f64) -> (f64, f64, f64) {
    let bp = boundary_pixels(p);
    let br = boundary_pixels(r);
    let d_pr: Vec<f64> = bp.iter().map(|&a| min_dist(a, &br)).collect();
    let d_rp: Vec<f64> = br.iter().map(|&a| min_dist(a, &bp)).collect();
    let all: Vec<f64> = d_pr.iter().chain(&d_rp).copied().collect();
    let hd95 = interp_percentile(&d_pr, 0.95).max(interp_percentile(&d_rp, 0.95));
    let asd = all.iter().sum::<f64>() / all.len() as f64;
    let nsd = all.iter().filter(|&&d| d <= tol).count() as f64 / all.len() as f64;
    (hd95, asd, nsd)
}

/// Maximum-cardinality matching over component pairs with IoU >= `thr`,
/// by exhaustive search. Returns `(n_pred, n_ref, matched)`.
pub fn brute_detection(p: &Mask2D, r: &Mask2D, thr: f64) -> (usize, usize, usize) {
    let cp = components_union_find(p);
    let cr = components_union_find(r);
    let ok: Vec<Vec<bool>> = cp
        .iter()
        .map(|a| {
            cr.iter()
                .map(|b| {
                    let inter = a.iter().filter(|q| b.contains(q)).count();
                    inter as f64 / (a.len() + b.len() - inter) as f64 >= thr
                })
                .collect()
        })
        .collect();
    fn best(i: usize, ok: &[Vec<bool>], used: &mut Vec<bool>) -> usize {
        if i == ok.len() {
            return 0;
        }
        let mut m = best(i + 1, ok, used);
        for j in 0..used.len() {
            if ok[i][j] && !used[j] {
                used[j] = true;
                m = m.max(1 + best(i + 1, ok, used));
                used[j] = false;
            }
        }
        m
    }
    let matched = best(0, &ok, &mut vec![false; cr.len()]);
    (cp.len(), cr.len(), matched)
}

// ---------------------------------------------------------------- statistics

/// Two-sided p-value by enumerating all `2^n` sign assignments of ranks
/// `1..=n`: the share of assignments whose smaller rank sum is at most the
/// observed one.
pub fn sign_flip_p(d: &[f64]) -> f64 {
    let mut abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = |x: f64| abs.iter().position(|&a| a == x.abs()).unwrap() + 1;
    let n = d.len();
    let total = n * (n + 1) / 2;
    let w_plus: usize = d.iter().filter(|&&x| x > 0.0).map(|&x| rank(x)).sum();
    let observed = w_plus.min(total - w_plus);
    let mut extreme = 0u64;
    for signs in 0u64..(1 << n) {
        let wp: usize = (0..n).filter(|b| signs >> b & 1 == 1).map(|b| b + 1).sum();
        if wp.min(total - wp) <= observed {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

/// Weighted kappa via agreement weights and the `(po - pe) / (1 - pe)` form.
pub fn kappa_direct(m: &[Vec<u64>], quadratic: bool) -> f64 {
    let k = m.len();
    let n: f64 = m.iter().flatten().sum::<u64>() as f64;
    let agree = |i: usize, j: usize| {
        let d = (i as f64 - j as f64).abs() / (k - 1) as f64;
        1.0 - if quadratic { d * d } else { d }
    };
    let mut po = 0.0;
    let mut pe = 0.0;
    for i in 0..k {
        let ri: u64 = m[i].iter().sum();
        for j in 0..k {
            let cj: u64 = (0..k).map(|r| m[r][j]).sum();
            po += agree(i, j) * m[i][j] as f64 / n;
            pe += agree(i, j) * (ri as f64 / n) * (cj as f64 / n);
        }
    }
    (po - pe) / (1.0 - pe)
}

/// `(accuracy, off_by_one, macro_f1, weighted_f1)` from expanded samples.
pub fn ordinal_by_counting(m: &[Vec<u64>]) -> (f64, f64, f64, f64) {
    let k = m.len();
    let mut samples = Vec::new();
    for (t, row) in m.iter().enumerate() {
        for (p, &c) in row.iter().enumerate() {
            for _ in 0..c {
                samples.push((t, p));
            }
        }
    }
    let n = samples.len() as f64;
    let acc = samples.iter().filter(|(t, p)| t == p).count() as f64 / n;
    let near = samples.iter().filter(|(t, p)| t.abs_diff(*p) <= 1).count() as f64 / n;
    let mut f1s = Vec::new();
    let mut support = Vec::new();
    for c in 0..k {
        let tp = samples.iter().filter(|&&(t, p)| t == c && p == c).count() as f64;
        let fp = samples.iter().filter(|&&(t, p)| t != c && p == c).count() as f64;
        let fneg = samples.iter().filter(|&&(t, p)| t == c && p != c).count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        f1s.push(f1);
        support.push(tp + fneg);
    }
    let macro_f1 = f1s.iter().sum::<f64>() / k as f64;
    let weighted = f1s.iter().zip(&support).map(|(f, s)| f * s).sum::<f64>() / n;
    (acc, near, macro_f1, weighted)
}

/// Reference SplitMix64 written from its published constants.
pub struct RefSplitMix(pub u64);

impl RefSplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((u128::from(self.next()) * n as u128) >> 64) as usize
    }
}

/// Percentile bootstrap of the mean with [`RefSplitMix`].
pub fn bootstrap_oracle(values: &[f64], resamples: usize, level: f64, seed: u64) -> (f64, f64, f64) {
    let n = values.len();
    let mut g = RefSplitMix(seed);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut s = 0.0;
        for _ in 0..n {
            s += values[g.below(n)];
        }
        means.push(s / n as f64);
    }
    let a = (1.0 - level) / 2.0;
    let mean = values.iter().sum::<f64>() / n as f64;
    (mean, interp_percentile(&means, a), interp_percentile(&means, 1.0 - a))
}
