use heiskakeya_core::dimest::{PackingParams, ScaleLadder};
use heiskakeya_core::experiments::{coarea_check, marstrand_experiment, marstrand_ladder, theta_grid};
use heiskakeya_core::setgen::{ifs_sampler, primitive_sampler, IfsSpec, PrimitiveKind, SetSampler};

#[test]
fn cantor2_projections_keep_its_dimension() {
    let spec = IfsSpec::cantor2();
    let target = 2f64.ln() / 3f64.ln();
    assert!((spec.similarity_dimension() - target).abs() < 1e-12);
    let k = ifs_sampler(spec).unwrap();
    let out = marstrand_experiment(&k, &theta_grid(8), &marstrand_ladder(), &PackingParams::default()).unwrap();
    let good = out.iter().filter(|(_, e)| (e.slope - target).abs() <= 0.15).count();
    assert!(good >= 7, "{out:?}");
}

#[test]
fn coarea_ratio_is_bounded_for_the_plane() {
    let f = primitive_sampler(PrimitiveKind::PlaneDisc, 1.0).unwrap();
    let b = f.bounds();
    for &d in ScaleLadder::default().deltas() {
        let r = coarea_check(&f, 2.0, d, (b.min[0], b.max[0]), 16, &PackingParams::default()).unwrap();
        assert!(r.ratio() >= 0.125 && r.ratio() <= 8.0, "delta={d} ratio={}", r.ratio());
    }
}

#[test]
fn coarea_slab_counts_follow_slice_geometry() {
    // a slice {x = c} of the cube is a unit square in (y, t); its Korányi packing
    // count is close to that of the square at x = 0 by left translation
    let f = primitive_sampler(PrimitiveKind::Cube, 1.0).unwrap();
    let r = coarea_check(&f, 3.0, 0.15, (0.0, 1.0), 4, &PackingParams::default()).unwrap();
    let (lo, hi) = r.slice_counts.iter().fold((usize::MAX, 0), |(a, b), &n| (a.min(n), b.max(n)));
    assert!(lo > 0 && (hi as f64) < 1.6 * lo as f64, "{:?}", r.slice_counts);
}
