//! Numerical experiments built from the other modules.
//!
//! Each experiment is split into independent items (one per projection
//! angle, slab or plane section) that take their own seed, plus a cheap
//! assembly step. The sequential drivers here run the items in order; the
//! `heiskakeya` crate runs the same items on a thread pool and produces
//! identical results.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dimest::{self, DimEstimate, Metric, PackingParams, ScaleLadder};
use crate::duality::{self, Axes, Projection, Vec3};
use crate::fmath;
use crate::hgroup::HPoint;
use crate::hlines::{self, Chart, CodeFamily, SQRT_3};
use crate::rng::{child_seed, SimRng};
use crate::setgen::{Bounds, FiniteSampler, SetSampler, SlabRestriction};
use crate::{Error, Result};

/// Scalar projections `<gamma(theta), w>` of draws `w` of an inner sampler,
/// embedded as `(value, 0, 0)`.
pub struct ProjectedSampler<S> {
    inner: S,
    dir: Vec3,
    bounds: Bounds,
    label: String,
}

impl<S: SetSampler> ProjectedSampler<S> {
    pub fn new(inner: S, theta: f64) -> Self {
        let dir = duality::gamma_theta(theta);
        let b = inner.bounds();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for corner in 0..8 {
            let pick = |i: usize| if corner >> i & 1 == 0 { b.min[i] } else { b.max[i] };
            let v = dir.dot(Vec3::new(pick(0), pick(1), pick(2)));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let label = format!("{} projected at theta={theta}", inner.label());
        ProjectedSampler {
            inner,
            dir,
            bounds: Bounds::new([lo, 0.0, 0.0], [hi, 0.0, 0.0]),
            label,
        }
    }
}

impl<S: SetSampler> SetSampler for ProjectedSampler<S> {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        let w = self.inner.draw(rng);
        HPoint::new(self.dir.dot(Vec3::new(w.x, w.y, w.t)), 0.0, 0.0)
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Finite sampler over `{dual_height(v, c) : v in set}`, affinely rescaled to
/// `[0, 1]` so that one ladder fits every `c`. A one-point set stays a point.
pub fn height_sampler(set: &[Vec3], c: f64) -> Result<FiniteSampler> {
    if set.is_empty() {
        return Err(Error::invalid("height_sampler", "code set is empty"));
    }
    let hs: Vec<f64> = set.iter().map(|v| duality::dual_height(*v, c)).collect();
    let lo = hs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { 1.0 / (hi - lo) } else { 0.0 };
    let points = hs.iter().map(|h| HPoint::new((h - lo) * scale, 0.0, 0.0)).collect();
    FiniteSampler::new(format!("heights at c={c}"), points)
}

/// `n` angles `2 pi (k + 1/2) / n`, `k = 0..n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    let n_f = n as f64;
    (0..n)
        .map(|k| 2.0 * core::f64::consts::PI * (k as f64 + 0.5) / n_f)
        .collect()
}

/// Euclidean dimension estimate of the projection of `k` onto `gamma(theta)`.
pub fn marstrand_theta<S: SetSampler>(
    k: &S,
    theta: f64,
    ladder: &ScaleLadder,
    stop_k: usize,
    seed: u64,
) -> Result<DimEstimate> {
    let proj = ProjectedSampler::new(k, theta);
    dimest::estimate_dimension(&proj, ladder, Metric::Euclidean, &PackingParams { stop_k, seed })
}

/// Projected dimension for every angle; angle `i` uses `child_seed(seed, i)`.
pub fn marstrand_experiment<S: SetSampler>(
    k: &S,
    thetas: &[f64],
    ladder: &ScaleLadder,
    params: &PackingParams,
) -> Result<Vec<(f64, DimEstimate)>> {
    if thetas.is_empty() {
        return Err(Error::invalid("marstrand_experiment", "no angles given"));
    }
    thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| Ok((t, marstrand_theta(k, t, ladder, params.stop_k, child_seed(params.seed, i as u64))?)))
        .collect()
}

/// Result of [`coarea_check`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoareaResult {
    pub alpha: f64,
    pub delta: f64,
    pub slab: (f64, f64),
    /// Korányi packing count of each thin slab.
    pub slice_counts: Vec<usize>,
    pub bulk_count: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl CoareaResult {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

fn check_coarea_args(alpha: f64, delta: f64, slab: (f64, f64), n_slices: usize) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("coarea_check", format!("alpha must be >= 0, got {alpha}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("coarea_check", format!("delta must be > 0, got {delta}")));
    }
    if n_slices < 2 {
        return Err(Error::invalid("coarea_check", format!("need n_slices >= 2, got {n_slices}")));
    }
    if !(slab.0 < slab.1) || !slab.0.is_finite() || !slab.1.is_finite() {
        return Err(Error::invalid("coarea_check", format!("empty slab range {:?}", slab)));
    }
    Ok(())
}

/// Centre of slab `j` of `n` across `slab`.
pub fn slab_centre(slab: (f64, f64), n_slices: usize, j: usize) -> f64 {
    slab.0 + (slab.1 - slab.0) * (j as f64 + 0.5) / n_slices as f64
}

/// Korányi packing count of `f` restricted to `|x - y| <= delta^2 / 2`; zero when the slab misses `f`.
pub fn coarea_slice_count<S: SetSampler>(f: &S, y: f64, delta: f64, stop_k: usize, seed: u64) -> Result<usize> {
    let w = 0.5 * delta * delta;
    match f.restrict_x(y - w, y + w) {
        SlabRestriction::Unsupported => Err(Error::NoSlabRestriction {
            label: String::from(f.label()),
        }),
        SlabRestriction::Empty => Ok(0),
        SlabRestriction::Sampler(s) => {
            Ok(dimest::greedy_packing_count(&s, delta, Metric::Heisenberg, stop_k, seed, None)?.count())
        }
    }
}

/// Combines slab and bulk counts into `(lhs, rhs)`.
pub fn coarea_assemble(alpha: f64, delta: f64, slab: (f64, f64), slice_counts: Vec<usize>, bulk_count: usize) -> CoareaResult {
    let dy = (slab.1 - slab.0) / slice_counts.len() as f64;
    let da = fmath::powf(delta, alpha);
    let lhs = slice_counts.iter().map(|&n| n as f64 * da * dy).sum();
    CoareaResult {
        alpha,
        delta,
        slab,
        rhs: bulk_count as f64 * da * delta,
        slice_counts,
        bulk_count,
        lhs,
    }
}

/// Discrete co-area comparison for `f(x, y, t) = x` at scale `delta`.
///
/// Slab `j` uses `child_seed(seed, j)`; the bulk packing uses `child_seed(seed, n_slices)`.
pub fn coarea_check<S: SetSampler>(
    f: &S,
    alpha: f64,
    delta: f64,
    slab: (f64, f64),
    n_slices: usize,
    params: &PackingParams,
) -> Result<CoareaResult> {
    check_coarea_args(alpha, delta, slab, n_slices)?;
    let slices = (0..n_slices)
        .map(|j| {
            let y = slab_centre(slab, n_slices, j);
            coarea_slice_count(f, y, delta, params.stop_k, child_seed(params.seed, j as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let bulk = dimest::greedy_packing_count(
        f,
        delta,
        Metric::Heisenberg,
        params.stop_k,
        child_seed(params.seed, n_slices as u64),
        None,
    )?
    .count();
    Ok(coarea_assemble(alpha, delta, slab, slices, bulk))
}

/// Which half of the slab around `c0` the kept segments cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    /// Sections taken over `[c0 - 1/4, c0]`.
    Left,
    /// Sections taken over `[c0, c0 + 1/4]`.
    Right,
}

/// Settings recorded alongside a pipeline run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineParams {
    pub c_grid: usize,
    pub c0_candidates: usize,
    /// Neighbourhood radius for the slope-coverage score.
    pub cover_delta: f64,
    pub deltas: Vec<f64>,
    pub stop_k: usize,
    /// How per-section bounds are combined.
    pub assembly: String,
}

/// Per-section record of a pipeline run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SliceEstimate {
    pub c: f64,
    pub height_dim: DimEstimate,
    pub slice_dim_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineReport {
    pub label: String,
    pub c0: f64,
    /// Union length of the slope neighbourhoods at `c0`.
    pub coverage: f64,
    pub restricted: usize,
    pub kept: usize,
    pub side: Side,
    pub crossing_ratio: f64,
    /// Distinct `(a, b, d)` of the kept codes.
    pub code_points: usize,
    pub per_c: Vec<SliceEstimate>,
    pub final_bound: f64,
    pub params: PipelineParams,
    pub seed: u64,
}

/// Candidate positions scanned for `c0`.
pub const C0_CANDIDATES: usize = 256;

/// Everything the pipeline fixes before the per-section estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelinePlan {
    pub label: String,
    pub c0: f64,
    pub coverage: f64,
    pub restricted: usize,
    pub kept: usize,
    pub side: Side,
    pub crossing_ratio: f64,
    pub code_set: Vec<Vec3>,
    pub cs: Vec<f64>,
    pub cover_delta: f64,
}

/// Total length of the union of `[b - r, b + r]` over sorted `bs`.
pub fn neighbourhood_length(bs: &[f64], r: f64) -> f64 {
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &b in bs {
        let (lo, hi) = (b - r, b + r);
        cur = match cur {
            Some((s, e)) if lo <= e => Some((s, e.max(hi))),
            Some((s, e)) => {
                total += e - s;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((s, e)) = cur {
        total += e - s;
    }
    total
}

/// Section positions: `c_grid` points evenly spaced over the quarter next to `c0`.
pub fn section_grid(c0: f64, side: Side, c_grid: usize) -> Vec<f64> {
    let sign = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    if c_grid == 1 {
        return alloc::vec![c0 + sign * 0.125];
    }
    (0..c_grid)
        .map(|j| c0 + sign * 0.25 * j as f64 / (c_grid - 1) as f64)
        .collect()
}

/// Steps (i)-(iii): choose `c0`, keep the larger crossing side, collect its code set.
pub fn pipeline_plan(family: &CodeFamily, c_grid: usize) -> Result<PipelinePlan> {
    if c_grid < 1 {
        return Err(Error::invalid("kakeya_dimension_pipeline", "c_grid must be >= 1"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for code in family.codes() {
        if code.chart == Chart::XParam && code.b.abs() < SQRT_3 {
            let (a, b) = code.param_interval();
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    if !(lo < hi) {
        return Err(Error::invalid(
            "kakeya_dimension_pipeline",
            "family has no x chart code with |b| < sqrt 3",
        ));
    }
    let cover_delta = 2.0 * SQRT_3 / (family.len().max(64) as f64);
    let mut best: Option<(f64, f64, CodeFamily)> = None;
    for k in 0..C0_CANDIDATES {
        let c = lo + (hi - lo) * (k as f64 + 0.5) / C0_CANDIDATES as f64;
        let restricted = duality::restrict_family(family, c);
        if restricted.is_empty() {
            continue;
        }
        let Projection::P2(bs) = duality::project_family(&restricted, Axes::P2)? else {
            unreachable!()
        };
        let score = neighbourhood_length(&bs, cover_delta);
        if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
            best = Some((c, score, restricted));
        }
    }
    let Some((c0, coverage, restricted)) = best else {
        return Err(Error::invalid(
            "kakeya_dimension_pipeline",
            "no candidate plane meets the family",
        ));
    };

    let mut left = Vec::new();
    let mut right = Vec::new();
    for code in restricted.codes() {
        let cross = hlines::slab_crossing(code, c0)?;
        if cross.reaches_left() {
            left.push(*code);
        }
        if cross.reaches_right() {
            right.push(*code);
        }
    }
    let (side, kept) = if right.len() >= left.len() {
        (Side::Right, right)
    } else {
        (Side::Left, left)
    };
    let kept = CodeFamily::new(format!("{}|kept", restricted.label), kept)?;
    let Projection::P123(code_set) = duality::project_family(&kept, Axes::P123)? else {
        unreachable!()
    };
    Ok(PipelinePlan {
        label: family.label.clone(),
        c0,
        coverage,
        restricted: restricted.len(),
        kept: kept.len(),
        side,
        crossing_ratio: kept.len() as f64 / restricted.len() as f64,
        code_set,
        cs: section_grid(c0, side, c_grid),
        cover_delta,
    })
}

/// Step (iv) for one section.
pub fn pipeline_slice(set: &[Vec3], c: f64, ladder: &ScaleLadder, stop_k: usize, seed: u64) -> Result<SliceEstimate> {
    let heights = height_sampler(set, c)?;
    let est = dimest::estimate_dimension(&heights, ladder, Metric::Euclidean, &PackingParams { stop_k, seed })?;
    Ok(SliceEstimate {
        c,
        slice_dim_bound: 2.0 * est.slope,
        height_dim: est,
    })
}

/// Median of a nonempty list; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Step (v): `final_bound = 1 + median(slice_dim_bound)`.
pub fn pipeline_assemble(
    plan: PipelinePlan,
    per_c: Vec<SliceEstimate>,
    ladder: &ScaleLadder,
    params: &PackingParams,
) -> PipelineReport {
    let bounds: Vec<f64> = per_c.iter().map(|s| s.slice_dim_bound).collect();
    PipelineReport {
        label: plan.label,
        c0: plan.c0,
        coverage: plan.coverage,
        restricted: plan.restricted,
        kept: plan.kept,
        side: plan.side,
        crossing_ratio: plan.crossing_ratio,
        code_points: plan.code_set.len(),
        final_bound: 1.0 + median(&bounds),
        params: PipelineParams {
            c_grid: plan.cs.len(),
            c0_candidates: C0_CANDIDATES,
            cover_delta: plan.cover_delta,
            deltas: ladder.deltas().to_vec(),
            stop_k: params.stop_k,
            assembly: String::from("1 + median(2 * height slope)"),
        },
        per_c,
        seed: params.seed,
    }
}

/// Ladder used by the pipeline on unit-diameter height sets.
pub fn pipeline_ladder() -> ScaleLadder {
    ScaleLadder::geometric(0.04, 0.005, 7).expect("valid ladder")
}

/// Ladder used for projection sweeps.
pub fn marstrand_ladder() -> ScaleLadder {
    ScaleLadder::geometric(1e-2, 1e-4, 14).expect("valid ladder")
}

/// Full dimension-bound pipeline; section `j` uses `child_seed(seed, j)`.
pub fn kakeya_dimension_pipeline(
    family: &CodeFamily,
    c_grid: usize,
    ladder: &ScaleLadder,
    params: &PackingParams,
) -> Result<PipelineReport> {
    let plan = pipeline_plan(family, c_grid)?;
    let per_c = plan
        .cs
        .iter()
        .enumerate()
        .map(|(j, &c)| pipeline_slice(&plan.code_set, c, ladder, params.stop_k, child_seed(params.seed, j as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(pipeline_assemble(plan, per_c, ladder, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hlines::SegmentCode;
    use crate::setgen::{ifs_sampler, kakeya_union_builder, primitive_sampler, IfsSpec, Placement, PrimitiveKind};
    use alloc::vec;

    fn quick() -> PackingParams {
        PackingParams { stop_k: 300, seed: 3 }
    }

    #[test]
    fn single_point_projects_to_a_point() {
        let k = FiniteSampler::new("pt", vec![HPoint::new(0.2, 0.4, 0.1)]).unwrap();
        let out = marstrand_experiment(&k, &theta_grid(4), &ScaleLadder::default(), &quick()).unwrap();
        for (_, est) in out {
            assert!(est.counts.iter().all(|&c| c == 1));
            assert_eq!(est.slope, 0.0);
        }
        assert!(marstrand_experiment(&k, &[], &ScaleLadder::default(), &quick()).is_err());
    }

    #[test]
    fn projected_sampler_stays_in_its_bounds() {
        let k = ifs_sampler(IfsSpec::cantor4()).unwrap();
        let p = ProjectedSampler::new(&k, 1.1);
        let mut rng = crate::rng::stream(0, 0);
        for _ in 0..1000 {
            assert!(p.bounds().contains(p.draw(&mut rng), 1e-12));
        }
    }

    #[test]
    fn coarea_arguments_are_checked() {
        let f = primitive_sampler(PrimitiveKind::Cube, 1.0).unwrap();
        let p = quick();
        assert!(coarea_check(&f, -1.0, 0.1, (0.0, 1.0), 4, &p).is_err());
        assert!(coarea_check(&f, 3.0, 0.0, (0.0, 1.0), 4, &p).is_err());
        assert!(coarea_check(&f, 3.0, 0.1, (0.0, 1.0), 1, &p).is_err());
        assert!(coarea_check(&f, 3.0, 0.1, (1.0, 1.0), 4, &p).is_err());
        let k = ifs_sampler(IfsSpec::cantor2()).unwrap();
        assert!(matches!(
            coarea_check(&k, 1.0, 0.1, (0.0, 1.0), 4, &p),
            Err(Error::NoSlabRestriction { .. })
        ));
    }

    #[test]
    fn coarea_single_point() {
        let f = FiniteSampler::new("pt", vec![HPoint::IDENTITY]).unwrap();
        let r = coarea_check(&f, 1.0, 0.1, (-0.5, 0.5), 5, &quick()).unwrap();
        assert_eq!(r.bulk_count, 1);
        assert_eq!(r.slice_counts, vec![0, 0, 1, 0, 0]);
        assert!(r.lhs <= 8.0 * r.rhs);
    }

    #[test]
    fn coarea_cube_ratio_is_moderate() {
        let f = primitive_sampler(PrimitiveKind::Cube, 1.0).unwrap();
        let b = f.bounds();
        let r = coarea_check(&f, 3.0, 0.2, (b.min[0], b.max[0]), 8, &PackingParams { stop_k: 500, seed: 1 }).unwrap();
        assert!(r.ratio() > 0.125 && r.ratio() < 8.0, "{r:?}");
    }

    #[test]
    fn neighbourhood_length_examples() {
        assert_eq!(neighbourhood_length(&[], 0.1), 0.0);
        assert!((neighbourhood_length(&[0.0], 0.1) - 0.2).abs() < 1e-15);
        assert!((neighbourhood_length(&[0.0, 0.1], 0.1) - 0.3).abs() < 1e-15);
        assert!((neighbourhood_length(&[0.0, 1.0], 0.1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn section_grid_covers_the_quarter() {
        assert_eq!(section_grid(0.5, Side::Right, 3), vec![0.5, 0.625, 0.75]);
        assert_eq!(section_grid(0.5, Side::Left, 3), vec![0.5, 0.375, 0.25]);
        assert_eq!(section_grid(0.5, Side::Right, 1), vec![0.625]);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn height_sampler_rescales() {
        let set = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, -1.0, 0.0), Vec3::new(0.0, 0.0, 0.0)];
        let s = height_sampler(&set, 1.0).unwrap();
        let xs: Vec<f64> = s.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 1.0, 0.5]);
        let s = height_sampler(&set[..1], 1.0).unwrap();
        assert_eq!(s.points()[0].x, 0.0);
    }

    #[test]
    fn pipeline_single_code_is_degenerate() {
        let f = CodeFamily::new("one", vec![SegmentCode::new(0.1, 0.3, -0.2, -0.4)]).unwrap();
        let r = kakeya_dimension_pipeline(&f, 3, &pipeline_ladder(), &quick()).unwrap();
        assert_eq!(r.crossing_ratio, 1.0);
        assert_eq!(r.code_points, 1);
        assert!((r.final_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pipeline_rejects_families_without_usable_codes() {
        let steep = CodeFamily::new("steep", vec![SegmentCode::new(0.0, 2.0, 0.0, 0.0)]).unwrap();
        assert!(kakeya_dimension_pipeline(&steep, 3, &pipeline_ladder(), &quick()).is_err());
        let y = CodeFamily::new("y", vec![SegmentCode::new_y(0.0, 0.0, 0.0, 0.0)]).unwrap();
        assert!(kakeya_dimension_pipeline(&y, 3, &pipeline_ladder(), &quick()).is_err());
        assert!(kakeya_dimension_pipeline(&CodeFamily::empty("e"), 3, &pipeline_ladder(), &quick()).is_err());
    }

    #[test]
    fn plan_keeps_the_larger_side() {
        let f = kakeya_union_builder(256, Placement::Random, 5).unwrap();
        let plan = pipeline_plan(&f, 5).unwrap();
        assert!(plan.crossing_ratio >= 0.5);
        assert!(plan.kept <= plan.restricted);
        for c in &plan.cs {
            let d = (c - plan.c0).abs();
            assert!(d <= 0.25 + 1e-12);
        }
    }
}
