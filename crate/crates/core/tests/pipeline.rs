use heiskakeya_core::dimest::{fit_scaling_exponent, Metric, PackingParams};
use heiskakeya_core::duality::{dual_height, restrict_family};
use heiskakeya_core::experiments::{kakeya_dimension_pipeline, pipeline_ladder, pipeline_plan, Side};
use heiskakeya_core::hlines::{slab_crossing, SegmentCode};
use heiskakeya_core::setgen::{kakeya_union_builder, Placement};
use heiskakeya_core::CodeFamily;
use proptest::prelude::*;

/// Largest `delta`-separated subset of a finite set of reals: sweep left to right.
fn max_packing_1d(values: &mut [f64], delta: f64) -> usize {
    values.sort_by(f64::total_cmp);
    let mut n = 0;
    let mut last = f64::NEG_INFINITY;
    for &v in values.iter() {
        if v - last >= delta {
            n += 1;
            last = v;
        }
    }
    n
}

#[test]
fn plane_family_reaches_three() {
    let fam = kakeya_union_builder(2048, Placement::Plane, 1).unwrap();
    let r = kakeya_dimension_pipeline(&fam, 7, &pipeline_ladder(), &PackingParams::default()).unwrap();
    assert!((r.final_bound - 3.0).abs() <= 0.3, "{}", r.final_bound);
    assert!(r.crossing_ratio >= 0.5 - 1.0 / r.restricted as f64);
    for s in &r.per_c {
        assert_eq!(s.slice_dim_bound, 2.0 * s.height_dim.slope);
        // plane codes have a = d = 0, so heights are -b c^2 / 2
        assert!(s.c > 0.0);
    }
}

#[test]
fn random_family_heights_match_exact_packing() {
    let fam = kakeya_union_builder(2048, Placement::Random, 0).unwrap();
    let r = kakeya_dimension_pipeline(&fam, 5, &pipeline_ladder(), &PackingParams::default()).unwrap();
    assert!(r.final_bound >= 2.6, "{}", r.final_bound);

    // oracle: exact maximum packings of the explicit, rescaled height values
    let plan = pipeline_plan(&fam, 5).unwrap();
    let mut bounds = Vec::new();
    for (s, &c) in r.per_c.iter().zip(&plan.cs) {
        let hs: Vec<f64> = plan.code_set.iter().map(|v| dual_height(*v, c)).collect();
        let lo = hs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = hs.iter().map(|h| (h - lo) / (hi - lo)).collect();
        let exact: Vec<usize> = s
            .height_dim
            .deltas
            .iter()
            .map(|&d| max_packing_1d(&mut scaled.clone(), d))
            .collect();
        for (greedy, best) in s.height_dim.counts.iter().zip(&exact) {
            // any maximal packing has at least half the maximum
            assert!(*greedy <= *best && 2 * greedy >= *best, "{greedy} vs {best}");
        }
        bounds.push(2.0 * fit_scaling_exponent(&s.height_dim.deltas, &exact, Metric::Euclidean).unwrap().slope);
    }
    bounds.sort_by(f64::total_cmp);
    assert!(1.0 + bounds[bounds.len() / 2] >= 2.6);
}

#[test]
fn left_side_is_mirrored() {
    // six segments end at x = 0.6 and four start at x = 0.4, so every candidate
    // plane meeting all ten lies in (0.4, 0.6); the first six reach only left
    let mut codes = Vec::new();
    for i in 0..10 {
        let b = 1.2 + 0.02 * i as f64;
        let len = 1.0 / (b * b + 1.0f64).sqrt();
        if i < 6 {
            codes.push(SegmentCode::new(0.1 * i as f64, b, 0.2, 0.6 - len));
        } else {
            codes.push(SegmentCode::new(0.1 * i as f64, -b, -0.3, 0.4));
        }
    }
    let fam = CodeFamily::new("left", codes).unwrap();
    let r = kakeya_dimension_pipeline(&fam, 5, &pipeline_ladder(), &PackingParams { stop_k: 500, seed: 0 }).unwrap();
    assert_eq!(r.side, Side::Left);
    for s in &r.per_c {
        assert!(s.c <= r.c0 + 1e-12 && s.c >= r.c0 - 0.25 - 1e-12);
    }
}

#[test]
fn reports_are_deterministic() {
    let fam = kakeya_union_builder(512, Placement::Random, 3).unwrap();
    let p = PackingParams { stop_k: 500, seed: 9 };
    let a = kakeya_dimension_pipeline(&fam, 4, &pipeline_ladder(), &p).unwrap();
    let b = kakeya_dimension_pipeline(&fam, 4, &pipeline_ladder(), &p).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn crossing_ratio_is_at_least_half(m in 8usize..200, seed in 0u64..1000, placement in 0usize..3) {
        let placement = [Placement::Origin, Placement::Random, Placement::Plane][placement];
        let fam = kakeya_union_builder(m, placement, seed).unwrap();
        let plan = pipeline_plan(&fam, 3).unwrap();
        prop_assert!(plan.crossing_ratio >= 0.5 - 1.0 / plan.restricted as f64);
        let restricted = restrict_family(&fam, plan.c0);
        prop_assert_eq!(restricted.len(), plan.restricted);
        for code in restricted.codes() {
            prop_assert!(slab_crossing(code, plan.c0).unwrap() != heiskakeya_core::hlines::Crossing::None);
        }
    }
}
