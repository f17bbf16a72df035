//! Packing-dimension estimation under the Euclidean or Korányi metric.
//!
//! For each scale `delta` a maximal `delta`-separated subset is grown by
//! greedy insertion of sampler draws; the run stops after `stop_k`
//! consecutive rejections. The dimension estimate is the least-squares slope
//! of `log2 count` against `log2(1/delta)`.
//!
//! Neighbour lookups use a spatial hash. Under the Euclidean metric cells are
//! cubes of side `delta`. Under the Korányi metric the cells are
//! `delta x delta` in the horizontal coordinates and, vertically, buckets of a
//! sheared height `s = t - (X y - Y x) / 2` taken relative to the cell centre
//! `(X, Y)`. For two points in the same column with `d(p, q) < delta` this
//! height differs by at most `delta^2 / 4 + delta^2 / (2 sqrt 2) < 0.8 delta^2`,
//! so three buckets of width `0.8 delta^2` always contain every neighbour, at
//! any distance from the origin.

use alloc::vec::Vec;

use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

use crate::fmath;
use crate::hgroup::{self, HPoint};
use crate::rng;
use crate::setgen::{Bounds, SetSampler};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Metric {
    Euclidean,
    Heisenberg,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Heisenberg => "heisenberg",
        }
    }

    #[inline]
    pub fn dist(self, p: HPoint, q: HPoint) -> f64 {
        match self {
            Metric::Euclidean => hgroup::euclid_dist(p, q),
            Metric::Heisenberg => hgroup::dist(p, q),
        }
    }
}

/// Strictly decreasing list of scales with consecutive ratios in `[1.2, 2.0]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleLadder {
    deltas: Vec<f64>,
}

pub const MIN_LADDER_RATIO: f64 = 1.2;
pub const MAX_LADDER_RATIO: f64 = 2.0;

impl ScaleLadder {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::invalid("scale ladder", "no scales"));
        }
        if let Some(bad) = deltas.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::invalid("scale ladder", alloc::format!("scale {bad} is not a positive number")));
        }
        for w in deltas.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::invalid(
                    "scale ladder",
                    alloc::format!("scales must strictly decrease ({} then {})", w[0], w[1]),
                ));
            }
            let ratio = w[0] / w[1];
            // geometric ladders land on the end points up to rounding
            if !(MIN_LADDER_RATIO * (1.0 - 1e-9)..=MAX_LADDER_RATIO * (1.0 + 1e-9)).contains(&ratio) {
                return Err(Error::invalid(
                    "scale ladder",
                    alloc::format!("ratio {ratio} between {} and {} is outside [1.2, 2.0]", w[0], w[1]),
                ));
            }
        }
        Ok(ScaleLadder { deltas })
    }

    /// `levels` scales geometrically spaced from `delta_max` down to `delta_min`.
    pub fn geometric(delta_max: f64, delta_min: f64, levels: usize) -> Result<Self> {
        if !(delta_max > delta_min) {
            return Err(Error::invalid(
                "scale ladder",
                alloc::format!("delta-max {delta_max} must exceed delta-min {delta_min}"),
            ));
        }
        if levels < 2 {
            return Err(Error::invalid("scale ladder", "need at least 2 levels"));
        }
        let ratio = fmath::powf(delta_max / delta_min, 1.0 / (levels - 1) as f64);
        let deltas = (0..levels)
            .map(|k| {
                if k == levels - 1 {
                    delta_min
                } else {
                    delta_max / fmath::powf(ratio, k as f64)
                }
            })
            .collect();
        ScaleLadder::new(deltas)
    }

    /// Number of levels giving a ratio closest to `sqrt 2` between the two ends.
    pub fn levels_for(delta_max: f64, delta_min: f64) -> usize {
        let steps = 2.0 * fmath::log2(delta_max / delta_min);
        let n = libm::round(steps).max(1.0) as usize;
        n + 1
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

impl Default for ScaleLadder {
    /// `0.3 * 2^(-k/2)` for `k = 0..=5`, i.e. 0.3 down to about 0.053.
    fn default() -> Self {
        let deltas = (0..6).map(|k| 0.3 * fmath::powf(2.0, -(k as f64) / 2.0)).collect();
        ScaleLadder { deltas }
    }
}

/// Packing counts across a ladder and their log-log fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimEstimate {
    pub deltas: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub metric: Metric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PackingParams {
    /// Consecutive rejections that end a run.
    pub stop_k: usize,
    pub seed: u64,
}

impl Default for PackingParams {
    fn default() -> Self {
        PackingParams { stop_k: 2000, seed: 0 }
    }
}

/// Accepted points of one greedy run.
#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    pub delta: f64,
    pub points: Vec<HPoint>,
    /// Total sampler draws made by this run.
    pub draws: u64,
}

impl Packing {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

type CellKey = (i64, i64, i64);

/// Points stored inline per dense cell before spilling to the overflow map.
const INLINE: usize = 4;
/// Largest dense grid allocated; bigger boxes fall back to hashing.
const MAX_DENSE_CELLS: i64 = 1 << 20;

#[derive(Clone, Copy)]
struct Cell {
    len: u32,
    pts: [HPoint; INLINE],
}

const EMPTY_CELL: Cell = Cell {
    len: 0,
    pts: [HPoint::IDENTITY; INLINE],
};

/// Dense block of cells covering the sampler's bounding box; the third
/// index varies fastest so the three buckets of one column are adjacent.
struct DenseGrid {
    origin: CellKey,
    dims: (i64, i64, i64),
    cells: Vec<Cell>,
}

impl DenseGrid {
    #[inline]
    fn slot(&self, key: CellKey) -> Option<usize> {
        let (a, b, c) = (key.0 - self.origin.0, key.1 - self.origin.1, key.2 - self.origin.2);
        if a < 0 || b < 0 || c < 0 || a >= self.dims.0 || b >= self.dims.1 || c >= self.dims.2 {
            return None;
        }
        Some(((a * self.dims.1 + b) * self.dims.2 + c) as usize)
    }
}

/// Spatial hash over accepted points answering "is this candidate at
/// distance >= delta from all of them".
pub struct PackingIndex {
    metric: Metric,
    delta: f64,
    inv_cell: f64,
    bucket: f64,
    lo4: f64,
    hi4: f64,
    dense: Option<DenseGrid>,
    overflow: HashMap<CellKey, Vec<HPoint>, FxBuildHasher>,
    points: Vec<HPoint>,
}

impl PackingIndex {
    /// Index without a bounding box; every cell is hashed.
    pub fn new(metric: Metric, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("greedy_packing_count", alloc::format!("delta must be > 0, got {delta}")));
        }
        let d4 = delta * delta * delta * delta;
        Ok(PackingIndex {
            metric,
            delta,
            inv_cell: 1.0 / delta,
            bucket: 0.8 * delta * delta,
            lo4: d4 * (1.0 - 1e-9),
            hi4: d4 * (1.0 + 1e-9),
            dense: None,
            overflow: HashMap::with_hasher(FxBuildHasher),
            points: Vec::new(),
        })
    }

    /// Index with a dense grid over `bounds` when it is small enough.
    pub fn with_bounds(metric: Metric, delta: f64, bounds: &Bounds) -> Result<Self> {
        let mut index = PackingIndex::new(metric, delta)?;
        let finite = bounds.min.iter().chain(&bounds.max).all(|v| v.is_finite());
        if !finite {
            return Ok(index);
        }
        let lo = |v: f64, w: f64| fmath::floor(v / w) - 2.0;
        let hi = |v: f64, w: f64| fmath::floor(v / w) + 2.0;
        let (x0, x1) = (lo(bounds.min[0], delta), hi(bounds.max[0], delta));
        let (y0, y1) = (lo(bounds.min[1], delta), hi(bounds.max[1], delta));
        let (z0, z1) = match metric {
            Metric::Euclidean => (lo(bounds.min[2], delta), hi(bounds.max[2], delta)),
            Metric::Heisenberg => {
                // |X y - Y x| <= (|X| + |Y|) * 1.5 delta for any searched column centre
                let reach = |i: usize| bounds.min[i].abs().max(bounds.max[i].abs()) + 2.0 * delta;
                let shear = 0.75 * (reach(0) + reach(1)) * delta;
                (
                    lo(bounds.min[2] - shear, index.bucket),
                    hi(bounds.max[2] + shear, index.bucket),
                )
            }
        };
        let dims = (x1 - x0 + 1.0, y1 - y0 + 1.0, z1 - z0 + 1.0);
        let total = dims.0 * dims.1 * dims.2;
        if total.is_finite() && total <= MAX_DENSE_CELLS as f64 {
            let dims = (dims.0 as i64, dims.1 as i64, dims.2 as i64);
            index.dense = Some(DenseGrid {
                origin: (x0 as i64, y0 as i64, z0 as i64),
                dims,
                cells: alloc::vec![EMPTY_CELL; (dims.0 * dims.1 * dims.2) as usize],
            });
        }
        Ok(index)
    }

    #[inline]
    fn column(&self, p: HPoint) -> (i64, i64) {
        (
            fmath::floor(p.x * self.inv_cell) as i64,
            fmath::floor(p.y * self.inv_cell) as i64,
        )
    }

    #[inline]
    fn sheared_bucket(&self, p: HPoint, ix: i64, iy: i64) -> i64 {
        let cx = (ix as f64 + 0.5) * self.delta;
        let cy = (iy as f64 + 0.5) * self.delta;
        let s = p.t - 0.5 * (cx * p.y - cy * p.x);
        fmath::floor(s / self.bucket) as i64
    }

    #[inline]
    fn key(&self, p: HPoint) -> CellKey {
        let (ix, iy) = self.column(p);
        match self.metric {
            Metric::Euclidean => (ix, iy, fmath::floor(p.t * self.inv_cell) as i64),
            Metric::Heisenberg => (ix, iy, self.sheared_bucket(p, ix, iy)),
        }
    }

    /// Squared (Euclidean) or fourth-power (Korányi) distance compared
    /// against the matching power of `delta`, with an exact fallback near ties.
    #[inline]
    fn far_enough(&self, p: HPoint, q: HPoint) -> bool {
        let pow = match self.metric {
            Metric::Euclidean => {
                let (dx, dy, dt) = (p.x - q.x, p.y - q.y, p.t - q.t);
                let d2 = dx * dx + dy * dy + dt * dt;
                d2 * d2
            }
            Metric::Heisenberg => hgroup::dist4(p, q),
        };
        if pow < self.lo4 {
            false
        } else if pow >= self.hi4 {
            true
        } else {
            self.metric.dist(p, q) >= self.delta
        }
    }

    #[inline]
    fn cell_clear(&self, p: HPoint, key: CellKey) -> bool {
        let spilled = match self.dense.as_ref().and_then(|g| g.slot(key).map(|i| (g, i))) {
            Some((grid, i)) => {
                let cell = &grid.cells[i];
                let n = (cell.len as usize).min(INLINE);
                if !cell.pts[..n].iter().all(|q| self.far_enough(p, *q)) {
                    return false;
                }
                cell.len as usize > INLINE
            }
            None => !self.overflow.is_empty(),
        };
        if spilled {
            if let Some(rest) = self.overflow.get(&key) {
                return rest.iter().all(|q| self.far_enough(p, *q));
            }
        }
        true
    }

    /// True iff `p` is at distance `>= delta` from every stored point.
    pub fn is_separated(&self, p: HPoint) -> bool {
        let (ix, iy) = self.column(p);
        for jx in ix - 1..=ix + 1 {
            for jy in iy - 1..=iy + 1 {
                let jt = match self.metric {
                    Metric::Euclidean => fmath::floor(p.t * self.inv_cell) as i64,
                    Metric::Heisenberg => self.sheared_bucket(p, jx, jy),
                };
                for kt in jt - 1..=jt + 1 {
                    if !self.cell_clear(p, (jx, jy, kt)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn insert(&mut self, p: HPoint) {
        let key = self.key(p);
        let slot = self.dense.as_mut().and_then(|g| g.slot(key).map(|i| &mut g.cells[i]));
        match slot {
            Some(cell) if (cell.len as usize) < INLINE => {
                cell.pts[cell.len as usize] = p;
                cell.len += 1;
            }
            Some(cell) => {
                cell.len = cell.len.saturating_add(1);
                self.overflow.entry(key).or_default().push(p);
            }
            None => self.overflow.entry(key).or_default().push(p),
        }
        self.points.push(p);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<HPoint> {
        self.points
    }
}

/// Greedy maximal `delta`-separated subset of the sampled set.
///
/// `seed_points`, typically the packing from a larger scale, are accepted
/// before any draw.
pub fn greedy_packing_count<S: SetSampler + ?Sized>(
    sampler: &S,
    delta: f64,
    metric: Metric,
    stop_k: usize,
    rng_seed: u64,
    seed_points: Option<&[HPoint]>,
) -> Result<Packing> {
    greedy_packing_on_stream(sampler, delta, metric, stop_k, rng_seed, 0, seed_points)
}

fn greedy_packing_on_stream<S: SetSampler + ?Sized>(
    sampler: &S,
    delta: f64,
    metric: Metric,
    stop_k: usize,
    rng_seed: u64,
    stream: u64,
    seed_points: Option<&[HPoint]>,
) -> Result<Packing> {
    if stop_k < 1 {
        return Err(Error::invalid("greedy_packing_count", "stop_k must be >= 1"));
    }
    let mut index = PackingIndex::with_bounds(metric, delta, &sampler.bounds())?;
    for &p in seed_points.unwrap_or(&[]) {
        index.insert(p);
    }
    let mut rng = rng::stream(rng_seed, stream);
    let mut rejections = 0usize;
    let mut draws = 0u64;
    while rejections < stop_k {
        let p = sampler.draw(&mut rng);
        draws += 1;
        if index.is_separated(p) {
            index.insert(p);
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    Ok(Packing {
        delta,
        points: index.into_points(),
        draws,
    })
}

/// Greedy packings at every scale of the ladder, largest first, each seeded
/// with the previous one.
pub fn packing_ladder<S: SetSampler + ?Sized>(
    sampler: &S,
    ladder: &ScaleLadder,
    metric: Metric,
    params: &PackingParams,
) -> Result<Vec<Packing>> {
    let mut out: Vec<Packing> = Vec::with_capacity(ladder.len());
    for (k, &delta) in ladder.deltas().iter().enumerate() {
        let seeds = out.last().map(|p| p.points.as_slice());
        let run = greedy_packing_on_stream(sampler, delta, metric, params.stop_k, params.seed, k as u64, seeds)?;
        out.push(run);
    }
    Ok(out)
}

/// Least-squares line through `(log2(1/delta_i), log2 count_i)`.
pub fn fit_scaling_exponent(deltas: &[f64], counts: &[usize], metric: Metric) -> Result<DimEstimate> {
    if deltas.len() != counts.len() {
        return Err(Error::invalid("fit_scaling_exponent", "deltas and counts differ in length"));
    }
    if deltas.len() < 4 {
        return Err(Error::invalid(
            "fit_scaling_exponent",
            alloc::format!("need at least 4 scales, got {}", deltas.len()),
        ));
    }
    if counts.contains(&0) {
        return Err(Error::invalid("fit_scaling_exponent", "counts must be positive"));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::invalid("fit_scaling_exponent", "scales must be positive"));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| -fmath::log2(*d)).collect();
    let ys: Vec<f64> = counts.iter().map(|c| fmath::log2(*c as f64)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("fit_scaling_exponent", "scales must not all coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(DimEstimate {
        deltas: deltas.to_vec(),
        counts: counts.to_vec(),
        slope,
        intercept,
        r2,
        metric,
    })
}

/// Packing-count dimension estimate of the sampled set.
pub fn estimate_dimension<S: SetSampler + ?Sized>(
    sampler: &S,
    ladder: &ScaleLadder,
    metric: Metric,
    params: &PackingParams,
) -> Result<DimEstimate> {
    let runs = packing_ladder(sampler, ladder, metric, params)?;
    let counts: Vec<usize> = runs.iter().map(Packing::count).collect();
    fit_scaling_exponent(ladder.deltas(), &counts, metric)
}
