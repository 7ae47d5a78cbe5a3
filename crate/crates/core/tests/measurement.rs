mod common;

use common::*;
use drr_anatomy::measurement::{
    cardiothoracic_ratio, centroid, clean_mask, cobb_geometry, grade, kyphosis_cobb, row_width, scd_geometry,
    scoliosis_scd, thorax_from_parts, Centroid, Condition, Evidence, Grade, MeasureConfig,
};
use drr_anatomy::projection::{project_study, ProjectionConfig};
use drr_anatomy::{phantom, Mask2D, View};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rect(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Mask2D {
    Mask2D::from_fn(View::Pa, 0, w, h, |x, y| {
        (x0..=x1).contains(&x) && (y0..=y1).contains(&y)
    })
    .unwrap()
}

/// Pixels within `r` of a sub-pixel centre.
fn disc(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> Mask2D {
    Mask2D::from_fn(View::Ll, 0, w, h, |x, y| (x as f64 - cx).hypot(y as f64 - cy) <= r).unwrap()
}

#[test]
fn clean_mask_matches_union_find_filter() {
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..300 {
        let (w, h) = (rng.gen_range(1..16), rng.gen_range(1..16));
        let density = rng.gen_range(0.05..0.6);
        let m = random_mask(&mut rng, w, h, density);
        let thr = rng.gen_range(0..12);
        let cleaned = clean_mask(&m, thr);
        let mut keep = vec![false; w * h];
        for comp in components_union_find(&m) {
            if comp.len() >= thr {
                for p in comp {
                    keep[p] = true;
                }
            }
        }
        for y in 0..h {
            for x in 0..w {
                assert_eq!(cleaned.get(x, y), keep[y * w + x]);
            }
        }
    }
}

#[test]
fn clean_mask_drops_specks() {
    let mut m = rect(30, 30, 0, 0, 9, 9);
    for (x, y) in [(20, 20), (21, 20), (20, 21)] {
        m.set(x, y, true);
    }
    let c = clean_mask(&m, 10);
    assert_eq!(c.count(), 100);
    assert!(clean_mask(&Mask2D::empty(View::Pa, 0, 4, 4).unwrap(), 10).is_empty());
}

#[test]
fn centroid_and_row_width_match_scans() {
    let mut rng = StdRng::seed_from_u64(32);
    for _ in 0..200 {
        let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
        let m = random_mask(&mut rng, w, h, 0.3);
        let px = pixels(&m);
        match centroid(&m) {
            None => assert!(px.is_empty()),
            Some(c) => {
                let n = px.len() as f64;
                assert_eq!(c.x, px.iter().map(|p| p.0 as f64).sum::<f64>() / n);
                assert_eq!(c.y, px.iter().map(|p| p.1 as f64).sum::<f64>() / n);
            }
        }
        for y in 0..h {
            let xs: Vec<usize> = (0..w).filter(|&x| m.get(x, y)).collect();
            let expect = xs.first().map(|&first| xs.last().unwrap() - first);
            assert_eq!(row_width(&m, y), expect);
        }
    }
    let single = rect(10, 10, 3, 7, 3, 7);
    assert_eq!(centroid(&single), Some(Centroid::new(3.0, 7.0)));
    assert_eq!(centroid(&rect(4, 4, 0, 0, 1, 1)), Some(Centroid::new(0.5, 0.5)));
}

#[test]
fn grade_boundaries_follow_the_table() {
    use Condition::*;
    use Grade::*;
    let e = 1e-6;
    let cases = [
        (Cardiomegaly, 0.50, [Negative, Negative, Mild]),
        (Cardiomegaly, 0.55, [Mild, Mild, Moderate]),
        (Cardiomegaly, 0.60, [Moderate, Moderate, Severe]),
        (Scoliosis, 10.0, [Negative, Mild, Mild]),
        (Scoliosis, 25.0, [Mild, Moderate, Moderate]),
        (Scoliosis, 45.0, [Moderate, Severe, Severe]),
        (Kyphosis, 50.0, [Negative, Mild, Mild]),
        (Kyphosis, 60.0, [Mild, Moderate, Moderate]),
        (Kyphosis, 70.0, [Moderate, Severe, Severe]),
    ];
    for (c, v, [below, at, above]) in cases {
        assert_eq!(grade(c, v - e).unwrap(), below, "{c} {v}-");
        assert_eq!(grade(c, v).unwrap(), at, "{c} {v}");
        assert_eq!(grade(c, v + e).unwrap(), above, "{c} {v}+");
    }
    assert!(grade(Scoliosis, f64::NAN).is_err());
    assert!(grade(Kyphosis, 181.0).is_err());
    assert!(grade(Cardiomegaly, -0.1).is_err());
}

#[test]
fn ctr_examples() {
    let cfg = MeasureConfig::default();
    let thorax = rect(120, 40, 10, 5, 110, 30);
    let heart = rect(120, 40, 30, 15, 80, 25);
    let r = cardiothoracic_ratio(&heart, &thorax, &cfg).unwrap();
    assert_eq!(r.value, Some(0.5));
    assert_eq!(r.grade, Some(Grade::Negative));
    let heart = rect(120, 40, 30, 15, 91, 25);
    let r = cardiothoracic_ratio(&heart, &thorax, &cfg).unwrap();
    assert_eq!((r.value, r.grade), (Some(0.61), Some(Grade::Severe)));
    let r = cardiothoracic_ratio(&thorax, &thorax, &cfg).unwrap();
    assert_eq!((r.value, r.grade), (Some(1.0), Some(Grade::Severe)));

    let empty = Mask2D::empty(View::Pa, 0, 120, 40).unwrap();
    assert!(cardiothoracic_ratio(&empty, &thorax, &cfg).unwrap().excluded);
    assert!(cardiothoracic_ratio(&heart, &empty, &cfg).unwrap().excluded);
    // three similar blobs: fragmented silhouette
    let frag = rect(120, 40, 20, 10, 25, 15)
        .union(&rect(120, 40, 40, 10, 45, 15))
        .unwrap()
        .union(&rect(120, 40, 60, 10, 65, 15))
        .unwrap();
    let r = cardiothoracic_ratio(&frag, &thorax, &cfg).unwrap();
    assert!(r.excluded);
    assert!(r.exclusion_reason.unwrap().contains("fragmented"));
}

#[test]
fn thorax_helper_fills_between_lungs() {
    let l = rect(40, 20, 2, 2, 10, 15);
    let r = rect(40, 20, 25, 4, 35, 15);
    let t = thorax_from_parts(&[l, r]).unwrap();
    assert_eq!(row_width(&t, 5), Some(33));
    assert!(t.get(18, 5));
    assert!(!t.get(18, 3));
}

#[test]
fn scd_centroid_examples() {
    let straight = [
        Centroid::new(0.0, 0.0),
        Centroid::new(0.0, 10.0),
        Centroid::new(0.0, 20.0),
    ];
    assert_eq!(scd_geometry(&straight).unwrap().0, 0.0);
    let bent = [
        Centroid::new(0.0, 0.0),
        Centroid::new(10.0, 10.0),
        Centroid::new(0.0, 20.0),
    ];
    let (scd, ev) = scd_geometry(&bent).unwrap();
    assert!((scd - 90.0).abs() < 1e-12);
    assert_eq!(grade(Condition::Scoliosis, scd).unwrap(), Grade::Severe);
    assert_eq!(ev.apex, Centroid::new(10.0, 10.0));
    // apex offset chosen so that the apex angle is 170 degrees
    let d = 10.0 / 85f64.to_radians().tan();
    let ten = [
        Centroid::new(0.0, 0.0),
        Centroid::new(d, 10.0),
        Centroid::new(0.0, 20.0),
    ];
    assert!((scd_geometry(&ten).unwrap().0 - 10.0).abs() < 1e-9);
}

#[test]
fn straight_spine_phantoms_measure_zero() {
    let cfg = MeasureConfig::default();
    for (dx, dy) in [(0usize, 12usize), (2, 11), (5, 9)] {
        let vs: Vec<Mask2D> = (0..7)
            .map(|n| rect(80, 100, 3 + n * dx, 2 + n * dy, 6 + n * dx, 6 + n * dy))
            .collect();
        let scd = scoliosis_scd(&vs, &cfg).unwrap();
        let cobb = kyphosis_cobb(&vs, &cfg).unwrap();
        assert!(scd.value.unwrap().abs() < 1e-6, "{scd:?}");
        assert!(cobb.value.unwrap().abs() < 1e-6, "{cobb:?}");
        assert_eq!(scd.grade, Some(Grade::Negative));
        assert_eq!(cobb.grade, Some(Grade::Negative));
    }
}

/// Vertebral discs centred on a circular arc of `span_deg` degrees, the
/// spine running downward and bulging toward +x.
fn arc_vertebrae(n: usize, span_deg: f64, radius: f64, scale: f64, offset: (f64, f64)) -> Vec<Mask2D> {
    let half = span_deg.to_radians() / 2.0;
    let size = ((2.0 * radius * half.sin() + 40.0) * scale) as usize + 20;
    (0..n)
        .map(|i| {
            let th = -half + 2.0 * half * i as f64 / (n - 1) as f64;
            let x = 20.0 + radius * (th.cos() - half.cos());
            let y = 20.0 + radius * (th.sin() + half.sin());
            disc(size, size, x * scale + offset.0, y * scale + offset.1, 5.0 * scale)
        })
        .collect()
}

#[test]
fn circular_arc_phantom_recovers_tangent_angle() {
    let cfg = MeasureConfig::default();
    for (n, span) in [(9, 60.0), (12, 45.0), (7, 75.0)] {
        let vs = arc_vertebrae(n, span, 150.0, 1.0, (0.0, 0.0));
        let r = kyphosis_cobb(&vs, &cfg).unwrap();
        let cobb = r.value.unwrap();
        assert!((cobb - span).abs() < 1.0, "n={n} span={span}: {cobb}");
        let Some(Evidence::Cobb(ev)) = r.evidence else {
            panic!("missing evidence")
        };
        assert_eq!((ev.t_upper, ev.t_lower), (0.0, 1.0));
    }
    let sixty = kyphosis_cobb(&arc_vertebrae(9, 60.0, 150.0, 1.0, (0.0, 0.0)), &cfg).unwrap();
    let scaled = kyphosis_cobb(&arc_vertebrae(9, 60.0, 150.0, 2.0, (0.0, 0.0)), &cfg).unwrap();
    let moved = kyphosis_cobb(&arc_vertebrae(9, 60.0, 150.0, 1.0, (7.0, 5.0)), &cfg).unwrap();
    assert!((sixty.value.unwrap() - scaled.value.unwrap()).abs() < 0.5);
    assert!((sixty.value.unwrap() - moved.value.unwrap()).abs() < 1e-9);
}

#[test]
fn vertebra_exclusions() {
    let cfg = MeasureConfig::default();
    let vs: Vec<Mask2D> = (0..3).map(|n| rect(40, 60, 10, 2 + 12 * n, 14, 6 + 12 * n)).collect();
    let r = scoliosis_scd(&vs, &cfg).unwrap();
    assert!(
        r.excluded
            && r.exclusion_reason
                .unwrap()
                .contains("too few contiguous vertebral masks")
    );
    // a missing vertebra splits the run; the longer run is used
    let mut vs: Vec<Mask2D> = (0..8).map(|n| rect(40, 120, 10, 2 + 12 * n, 14, 6 + 12 * n)).collect();
    vs[2] = Mask2D::empty(View::Pa, 0, 40, 120).unwrap();
    let r = scoliosis_scd(&vs, &cfg).unwrap();
    let Some(Evidence::Scd(ev)) = r.evidence else {
        panic!("missing evidence")
    };
    assert_eq!(ev.vertebra_indices, vec![3, 4, 5, 6, 7]);
    let r = kyphosis_cobb(&vs, &cfg).unwrap();
    assert!(r.value.unwrap().abs() < 1e-9);
    // repeated y positions cannot define a spine curve
    let same_row: Vec<Mask2D> = (0..5).map(|n| rect(80, 20, 2 + 12 * n, 5, 6 + 12 * n, 9)).collect();
    assert!(kyphosis_cobb(&same_row, &cfg).unwrap().excluded);
}

#[test]
fn phantom_study_measures_end_to_end() {
    let p = phantom::chest_phantom();
    let views = project_study(&p.volume, &p.labels, &ProjectionConfig::default()).unwrap();
    let cfg = MeasureConfig::default();
    let by_id = |v: usize, id: u32| {
        let i = p.labels.iter().position(|l| l.label_id() == id).unwrap();
        views[v].masks[i].clone()
    };
    let thorax = thorax_from_parts(&[by_id(0, phantom::LUNG_A), by_id(0, phantom::LUNG_B)]).unwrap();
    let ctr = cardiothoracic_ratio(&by_id(0, phantom::HEART), &thorax, &cfg).unwrap();
    assert_eq!(ctr.value, Some(4.0 / 11.0));
    assert_eq!(ctr.grade, Some(Grade::Negative));
    let pa: Vec<Mask2D> = phantom::VERTEBRAE.iter().map(|&id| by_id(0, id)).collect();
    let ll: Vec<Mask2D> = phantom::VERTEBRAE.iter().map(|&id| by_id(1, id)).collect();
    assert_eq!(scoliosis_scd(&pa, &cfg).unwrap().value, Some(0.0));
    assert!(kyphosis_cobb(&ll, &cfg).unwrap().value.unwrap().abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn grades_are_monotone(a in 0.0f64..180.0, b in 0.0f64..180.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for c in Condition::ALL {
            let (lo, hi) = if c == Condition::Cardiomegaly { (lo / 100.0, hi / 100.0) } else { (lo, hi) };
            prop_assert!(grade(c, lo).unwrap() <= grade(c, hi).unwrap());
        }
    }

    #[test]
    fn scd_is_mirror_translation_and_scale_invariant(
        pts in prop::collection::vec((-50i32..50, 0i32..400), 4..9),
        tx in -100i32..100, ty in -100i32..100, s in 1i32..5,
    ) {
        let mut cs: Vec<Centroid> = pts.iter().map(|&(x, y)| Centroid::new(f64::from(x), f64::from(y))).collect();
        cs.sort_by(|a, b| a.y.total_cmp(&b.y));
        cs.dedup_by(|a, b| a.y == b.y);
        prop_assume!(cs.len() >= 3);
        let base = scd_geometry(&cs).map(|r| r.0);
        let mirror: Vec<Centroid> = cs.iter().map(|c| Centroid::new(-c.x, c.y)).collect();
        let moved: Vec<Centroid> = cs.iter().map(|c| Centroid::new(c.x + f64::from(tx), c.y + f64::from(ty))).collect();
        let scaled: Vec<Centroid> = cs.iter().map(|c| Centroid::new(c.x * f64::from(s), c.y * f64::from(s))).collect();
        for other in [mirror, moved, scaled] {
            let v = scd_geometry(&other).map(|r| r.0);
            match (base, v) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}"),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn cobb_is_translation_and_scale_invariant(
        pts in prop::collection::vec((-30i32..30, 0i32..400), 5..9),
        tx in -100i32..100, ty in -100i32..100, s in 1i32..5,
    ) {
        let mut cs: Vec<Centroid> = pts.iter().map(|&(x, y)| Centroid::new(f64::from(x), f64::from(y))).collect();
        cs.sort_by(|a, b| a.y.total_cmp(&b.y));
        cs.dedup_by(|a, b| a.y == b.y);
        prop_assume!(cs.len() >= 5);
        let base = cobb_geometry(&cs).unwrap().0;
        let moved: Vec<Centroid> = cs.iter().map(|c| Centroid::new(c.x + f64::from(tx), c.y + f64::from(ty))).collect();
        let scaled: Vec<Centroid> = cs.iter().map(|c| Centroid::new(c.x * f64::from(s), c.y * f64::from(s))).collect();
        prop_assert!((base - cobb_geometry(&moved).unwrap().0).abs() < 1e-6);
        prop_assert!((base - cobb_geometry(&scaled).unwrap().0).abs() < 1e-6);
        prop_assert!((0.0..=180.0).contains(&base));
    }

    #[test]
    fn ctr_is_translation_invariant(hx in 2usize..20, tw in 20usize..40, tx in 0usize..10, ty in 0usize..10) {
        let cfg = MeasureConfig::default();
        let (w, h) = (60, 30);
        let thorax = rect(w, h, 1 + tx, 2 + ty, tw + tx, 15 + ty);
        let heart = rect(w, h, 5 + tx, 6 + ty, 5 + hx + tx, 12 + ty);
        let base = cardiothoracic_ratio(&rect(w, h, 5, 6, 5 + hx, 12), &rect(w, h, 1, 2, tw, 15), &cfg).unwrap();
        let moved = cardiothoracic_ratio(&heart, &thorax, &cfg).unwrap();
        prop_assert_eq!(moved.value, base.value);
        prop_assert_eq!(moved.value, Some(hx as f64 / (tw - 1) as f64));
    }
}
