//! Exact point samplers and Kakeya code-family generators.
//!
//! Samplers are immutable descriptions of a set; randomness is supplied by
//! the caller on every draw, so one sampler can be shared between threads
//! as long as each thread owns its generator.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::distributions::Open01;
use rand::Rng;

use crate::fmath;
use crate::hgroup::{self, HPoint};
use crate::hlines::{code_from_translation, code_from_translation_y, normalize_angle, Chart, CodeFamily, SegmentCode};
use crate::rng::{self, SimRng};
use crate::{Error, Result};

/// Axis-aligned bounding box in `(x, y, t)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Bounds {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Bounds { min, max }
    }

    pub fn point(p: HPoint) -> Self {
        Bounds::new(p.to_array(), p.to_array())
    }

    pub fn contains(&self, p: HPoint, tol: f64) -> bool {
        p.to_array()
            .iter()
            .enumerate()
            .all(|(i, v)| *v >= self.min[i] - tol && *v <= self.max[i] + tol)
    }

    pub fn union(&self, other: &Bounds) -> Bounds {
        Bounds::new(
            core::array::from_fn(|i| self.min[i].min(other.min[i])),
            core::array::from_fn(|i| self.max[i].max(other.max[i])),
        )
    }
}

/// Outcome of restricting a sampler to the slab `lo <= x <= hi`.
pub enum SlabRestriction {
    /// The sampler cannot be restricted exactly.
    Unsupported,
    /// The slab misses the set.
    Empty,
    Sampler(Box<dyn SetSampler>),
}

/// A set that can produce exact member points.
pub trait SetSampler: Send + Sync {
    /// Draws one member point.
    fn draw(&self, rng: &mut SimRng) -> HPoint;

    fn bounds(&self) -> Bounds;

    fn label(&self) -> &str;

    /// The set intersected with `lo <= x <= hi`, if it can be sampled exactly.
    fn restrict_x(&self, _lo: f64, _hi: f64) -> SlabRestriction {
        SlabRestriction::Unsupported
    }
}

impl<S: SetSampler + ?Sized> SetSampler for Box<S> {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        (**self).draw(rng)
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
    fn restrict_x(&self, lo: f64, hi: f64) -> SlabRestriction {
        (**self).restrict_x(lo, hi)
    }
}

impl<S: SetSampler + ?Sized> SetSampler for &S {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        (**self).draw(rng)
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
    fn restrict_x(&self, lo: f64, hi: f64) -> SlabRestriction {
        (**self).restrict_x(lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PrimitiveKind {
    /// `{t = 0, x^2 + y^2 <= size^2}`.
    PlaneDisc,
    /// `{(0, 0, u) : 0 <= u <= size}`.
    TAxis,
    /// `{(u, 0, 0) : 0 <= u <= size}`.
    XAxisSegment,
    /// `[0, size]^3`.
    Cube,
}

impl PrimitiveKind {
    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::PlaneDisc => "plane",
            PrimitiveKind::TAxis => "t-axis",
            PrimitiveKind::XAxisSegment => "x-segment",
            PrimitiveKind::Cube => "cube",
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    /// Uniform on a (possibly degenerate) box.
    Box { min: [f64; 3], max: [f64; 3] },
    /// Uniform on the part of the disc `x^2 + y^2 <= r^2, t = 0` with `x` in `[x_lo, x_hi]`.
    Disc { r: f64, x_lo: f64, x_hi: f64 },
}

/// Calibration sets with known dimensions.
#[derive(Debug, Clone)]
pub struct PrimitiveSampler {
    kind: PrimitiveKind,
    size: f64,
    shape: Shape,
    label: String,
}

impl PrimitiveSampler {
    pub fn kind(&self) -> PrimitiveKind {
        self.kind
    }

    pub fn size(&self) -> f64 {
        self.size
    }

    /// Whether `p` satisfies the defining equations of the set, up to `tol`.
    pub fn contains(&self, p: HPoint, tol: f64) -> bool {
        let s = self.size;
        let within = |v: f64| v >= -tol && v <= s + tol;
        match self.kind {
            PrimitiveKind::PlaneDisc => p.t.abs() <= tol && fmath::hypot(p.x, p.y) <= s + tol,
            PrimitiveKind::TAxis => p.x.abs() <= tol && p.y.abs() <= tol && within(p.t),
            PrimitiveKind::XAxisSegment => p.y.abs() <= tol && p.t.abs() <= tol && within(p.x),
            PrimitiveKind::Cube => within(p.x) && within(p.y) && within(p.t),
        }
    }
}

/// Sampler for one of the calibration sets.
pub fn primitive_sampler(kind: PrimitiveKind, size: f64) -> Result<PrimitiveSampler> {
    if !(size > 0.0) || !size.is_finite() {
        return Err(Error::invalid("primitive_sampler", format!("size must be > 0, got {size}")));
    }
    let shape = match kind {
        PrimitiveKind::PlaneDisc => Shape::Disc {
            r: size,
            x_lo: -size,
            x_hi: size,
        },
        PrimitiveKind::TAxis => Shape::Box {
            min: [0.0; 3],
            max: [0.0, 0.0, size],
        },
        PrimitiveKind::XAxisSegment => Shape::Box {
            min: [0.0; 3],
            max: [size, 0.0, 0.0],
        },
        PrimitiveKind::Cube => Shape::Box {
            min: [0.0; 3],
            max: [size; 3],
        },
    };
    Ok(PrimitiveSampler {
        kind,
        size,
        shape,
        label: format!("{}({size})", kind.name()),
    })
}

impl SetSampler for PrimitiveSampler {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        match self.shape {
            Shape::Box { min, max } => {
                let c: [f64; 3] = core::array::from_fn(|i| {
                    let u: f64 = rng.gen();
                    min[i] + (max[i] - min[i]) * u
                });
                HPoint::from_array(c)
            }
            Shape::Disc { r, x_lo, x_hi } => {
                let r2 = r * r;
                loop {
                    let u: f64 = rng.gen();
                    let v: f64 = rng.gen();
                    let x = x_lo + (x_hi - x_lo) * u;
                    let y = r * (2.0 * v - 1.0);
                    if x * x + y * y <= r2 {
                        return HPoint::new(x, y, 0.0);
                    }
                }
            }
        }
    }

    fn bounds(&self) -> Bounds {
        match self.shape {
            Shape::Box { min, max } => Bounds::new(min, max),
            Shape::Disc { r, x_lo, x_hi } => Bounds::new([x_lo, -r, 0.0], [x_hi, r, 0.0]),
        }
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn restrict_x(&self, lo: f64, hi: f64) -> SlabRestriction {
        let shape = match self.shape {
            Shape::Box { mut min, mut max } => {
                let (a, b) = (min[0].max(lo), max[0].min(hi));
                if a > b {
                    return SlabRestriction::Empty;
                }
                min[0] = a;
                max[0] = b;
                Shape::Box { min, max }
            }
            Shape::Disc { r, x_lo, x_hi } => {
                let (a, b) = (x_lo.max(lo), x_hi.min(hi));
                if a > b {
                    return SlabRestriction::Empty;
                }
                Shape::Disc { r, x_lo: a, x_hi: b }
            }
        };
        SlabRestriction::Sampler(Box::new(PrimitiveSampler {
            kind: self.kind,
            size: self.size,
            shape,
            label: format!("{}[x in {lo}..{hi}]", self.label),
        }))
    }
}

/// Uniform choice from a finite point list.
#[derive(Debug, Clone)]
pub struct FiniteSampler {
    points: Vec<HPoint>,
    bounds: Bounds,
    label: String,
}

impl FiniteSampler {
    pub fn new(label: impl Into<String>, points: Vec<HPoint>) -> Result<Self> {
        let first = *points
            .first()
            .ok_or_else(|| Error::invalid("finite sampler", "point list is empty"))?;
        let bounds = points
            .iter()
            .fold(Bounds::point(first), |b, p| b.union(&Bounds::point(*p)));
        Ok(FiniteSampler {
            points,
            bounds,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }
}

impl SetSampler for FiniteSampler {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        self.points[rng.gen_range(0..self.points.len())]
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn restrict_x(&self, lo: f64, hi: f64) -> SlabRestriction {
        let kept: Vec<_> = self.points.iter().copied().filter(|p| p.x >= lo && p.x <= hi).collect();
        match FiniteSampler::new(format!("{}[x in {lo}..{hi}]", self.label), kept) {
            Ok(s) => SlabRestriction::Sampler(Box::new(s)),
            Err(_) => SlabRestriction::Empty,
        }
    }
}

/// Image of a sampler under the Heisenberg dilation by `r`.
pub struct DilatedSampler<S> {
    inner: S,
    r: f64,
    label: String,
}

impl<S: SetSampler> DilatedSampler<S> {
    pub fn new(inner: S, r: f64) -> Result<Self> {
        hgroup::dilate(r, HPoint::IDENTITY)?;
        let label = format!("dilate({r}, {})", inner.label());
        Ok(DilatedSampler { inner, r, label })
    }
}

impl<S: SetSampler> SetSampler for DilatedSampler<S> {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        let p = self.inner.draw(rng);
        HPoint::new(self.r * p.x, self.r * p.y, self.r * self.r * p.t)
    }

    fn bounds(&self) -> Bounds {
        let b = self.inner.bounds();
        let s = [self.r, self.r, self.r * self.r];
        Bounds::new(
            core::array::from_fn(|i| b.min[i] * s[i]),
            core::array::from_fn(|i| b.max[i] * s[i]),
        )
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Points of a union of coded horizontal segments.
#[derive(Debug, Clone)]
pub struct UnionSampler {
    /// Code with the open parameter range actually sampled.
    pieces: Vec<(SegmentCode, f64, f64)>,
    bounds: Bounds,
    label: String,
}

impl UnionSampler {
    fn from_pieces(label: String, pieces: Vec<(SegmentCode, f64, f64)>) -> Option<Self> {
        let mut bounds: Option<Bounds> = None;
        for (code, lo, hi) in &pieces {
            let b = Bounds::point(code.point_at(*lo)).union(&Bounds::point(code.point_at(*hi)));
            bounds = Some(match bounds {
                Some(acc) => acc.union(&b),
                None => b,
            });
        }
        Some(UnionSampler {
            bounds: bounds?,
            pieces,
            label,
        })
    }
}

/// Sampler over the union of the segments of `family`.
pub fn union_sampler(family: &CodeFamily) -> Result<UnionSampler> {
    let pieces = family
        .codes()
        .iter()
        .map(|c| {
            let (lo, hi) = c.param_interval();
            (*c, lo, hi)
        })
        .collect();
    UnionSampler::from_pieces(family.label.clone(), pieces)
        .ok_or_else(|| Error::invalid("union_sampler", "family is empty"))
}

impl SetSampler for UnionSampler {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        let (code, lo, hi) = self.pieces[rng.gen_range(0..self.pieces.len())];
        let u: f64 = rng.sample(Open01);
        code.point_at(lo + (hi - lo) * u)
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn restrict_x(&self, lo: f64, hi: f64) -> SlabRestriction {
        let mut pieces = Vec::new();
        for &(code, s_lo, s_hi) in &self.pieces {
            let (a, b) = match code.chart {
                Chart::XParam => (s_lo.max(lo), s_hi.min(hi)),
                Chart::YParam if code.b == 0.0 => {
                    if code.a >= lo && code.a <= hi {
                        (s_lo, s_hi)
                    } else {
                        continue;
                    }
                }
                Chart::YParam => {
                    let (u, v) = ((lo - code.a) / code.b, (hi - code.a) / code.b);
                    let (u, v) = if u <= v { (u, v) } else { (v, u) };
                    (s_lo.max(u), s_hi.min(v))
                }
            };
            if a < b {
                pieces.push((code, a, b));
            }
        }
        match UnionSampler::from_pieces(format!("{}[x in {lo}..{hi}]", self.label), pieces) {
            Some(s) => SlabRestriction::Sampler(Box::new(s)),
            None => SlabRestriction::Empty,
        }
    }
}

/// Where the builder places each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Placement {
    /// Every segment centred at the origin.
    Origin,
    /// Centre `q` uniform in `[0, 1]^3`.
    Random,
    /// Centre `q = (q1, b q1, 0)`, so the segment lies in `{t = 0}`.
    Plane,
}

impl Placement {
    pub fn name(self) -> &'static str {
        match self {
            Placement::Origin => "origin",
            Placement::Random => "random",
            Placement::Plane => "plane",
        }
    }
}

/// One unit horizontal segment per direction `i pi / m`, `i = 0..m`.
///
/// Directions within `pi / 3` of the `x` axis use the `x` chart with
/// `b = tan(theta)`; the rest use the `y` chart with `b = cot(theta)`.
pub fn kakeya_union_builder(m: usize, placement: Placement, seed: u64) -> Result<CodeFamily> {
    if m < 4 {
        return Err(Error::invalid("kakeya_union_builder", format!("need m >= 4 directions, got {m}")));
    }
    let mut rng = rng::stream(seed, 0);
    let mut codes = Vec::with_capacity(m);
    for i in 0..m {
        let theta = i as f64 * PI / m as f64;
        let x_chart = 3 * i < m || 3 * i > 2 * m;
        let code = if x_chart {
            let phi = if 2 * i > m { theta - PI } else { theta };
            let b = fmath::tan(phi);
            let q = match placement {
                Placement::Origin => HPoint::IDENTITY,
                Placement::Random => HPoint::new(rng.gen(), rng.gen(), rng.gen()),
                Placement::Plane => {
                    let q1: f64 = rng.gen();
                    HPoint::new(q1, b * q1, 0.0)
                }
            };
            code_from_translation(q, b)
        } else {
            let b = fmath::cos(theta) / fmath::sin(theta);
            let q = match placement {
                Placement::Origin => HPoint::IDENTITY,
                Placement::Random => HPoint::new(rng.gen(), rng.gen(), rng.gen()),
                Placement::Plane => {
                    let q2: f64 = rng.gen();
                    HPoint::new(b * q2, q2, 0.0)
                }
            };
            code_from_translation_y(q, b)
        };
        codes.push(code);
    }
    CodeFamily::new(format!("kakeya-{}-m{m}", placement.name()), codes)
}

/// Outcome of [`verify_kakeya`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KakeyaReport {
    pub angles: usize,
    pub ang_tol: f64,
    pub covered: usize,
    pub missing: Vec<f64>,
}

/// Checks that every direction `j pi / angles` has a code within `ang_tol`
/// (directions taken modulo `pi`).
pub fn verify_kakeya(family: &CodeFamily, angles: usize, ang_tol: f64) -> Result<KakeyaReport> {
    if angles < 1 {
        return Err(Error::invalid("verify_kakeya", "need at least one direction"));
    }
    let mut dirs: Vec<f64> = family.codes().iter().map(SegmentCode::direction_angle).collect();
    dirs.sort_by(f64::total_cmp);
    let gap = |a: f64, b: f64| {
        let d = (a - b).abs();
        d.min(PI - d)
    };
    let mut missing = Vec::new();
    for j in 0..angles {
        let target = normalize_angle(j as f64 * PI / angles as f64);
        let ok = if dirs.is_empty() {
            false
        } else {
            let k = dirs.partition_point(|d| *d < target);
            let candidates = [k.checked_sub(1), Some(k % dirs.len()), Some(0), Some(dirs.len() - 1)];
            candidates
                .iter()
                .flatten()
                .any(|&i| gap(dirs[i % dirs.len()], target) <= ang_tol)
        };
        if !ok {
            missing.push(target);
        }
    }
    Ok(KakeyaReport {
        angles,
        ang_tol,
        covered: angles - missing.len(),
        missing,
    })
}

/// A contracting similarity `w -> ratio * w + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SimilarityMap {
    pub ratio: f64,
    pub offset: [f64; 3],
}

impl SimilarityMap {
    #[inline]
    fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        core::array::from_fn(|i| self.ratio * p[i] + self.offset[i])
    }

    fn fixed_point(&self) -> [f64; 3] {
        core::array::from_fn(|i| self.offset[i] / (1.0 - self.ratio))
    }
}

/// An iterated function system of similarities, sampled at word length `depth`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct IfsSpec {
    pub maps: Vec<SimilarityMap>,
    pub depth: usize,
}

impl IfsSpec {
    /// Two maps of ratio 1/3 fixing the ends of the main cube diagonal.
    pub fn cantor2() -> Self {
        let t = 2.0 / 3.0;
        IfsSpec {
            maps: alloc::vec![
                SimilarityMap { ratio: 1.0 / 3.0, offset: [0.0; 3] },
                SimilarityMap { ratio: 1.0 / 3.0, offset: [t; 3] },
            ],
            depth: 40,
        }
    }

    /// Four maps of ratio 1/3 onto alternate corner subcubes of `[0, 1]^3`.
    pub fn cantor4() -> Self {
        let t = 2.0 / 3.0;
        let map = |offset| SimilarityMap { ratio: 1.0 / 3.0, offset };
        IfsSpec {
            maps: alloc::vec![
                map([0.0, 0.0, 0.0]),
                map([t, t, 0.0]),
                map([t, 0.0, t]),
                map([0.0, t, t]),
            ],
            depth: 40,
        }
    }

    /// Resolves a bundled preset name (`CANTOR2`, `CANTOR4`, case-insensitive).
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "CANTOR2" => Some(IfsSpec::cantor2()),
            "CANTOR4" => Some(IfsSpec::cantor4()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::invalid("ifs_sampler", "at least one map is required"));
        }
        if self.depth < 1 {
            return Err(Error::invalid("ifs_sampler", "depth must be >= 1"));
        }
        for (i, m) in self.maps.iter().enumerate() {
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(Error::invalid("ifs_sampler", format!("map {i}: ratio {} not in (0, 1)", m.ratio)));
            }
            if m.offset.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("ifs_sampler", format!("map {i}: non-finite offset")));
            }
        }
        Ok(())
    }

    /// Similarity dimension: the root `s` of `sum r_i^s = 1`.
    pub fn similarity_dimension(&self) -> f64 {
        let moran = |s: f64| self.maps.iter().map(|m| fmath::powf(m.ratio, s)).sum::<f64>() - 1.0;
        if self.maps.len() == 1 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while moran(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moran(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Random-word sampler of an IFS attractor.
#[derive(Debug, Clone)]
pub struct IfsSampler {
    spec: IfsSpec,
    start: [f64; 3],
    bounds: Bounds,
    label: String,
}

impl IfsSampler {
    pub fn spec(&self) -> &IfsSpec {
        &self.spec
    }
}

/// Sampler drawing `f_{w_1} o ... o f_{w_depth}(p_0)` for uniform words, where
/// `p_0` is the fixed point of the first map.
pub fn ifs_sampler(spec: IfsSpec) -> Result<IfsSampler> {
    spec.validate()?;
    let start = spec.maps[0].fixed_point();
    // smallest invariant box, reached by iterating the box map from the fixed point
    let (mut lo, mut hi) = (start, start);
    for _ in 0..2000 {
        let mut nlo = [f64::INFINITY; 3];
        let mut nhi = [f64::NEG_INFINITY; 3];
        for m in &spec.maps {
            for i in 0..3 {
                nlo[i] = nlo[i].min(m.ratio * lo[i] + m.offset[i]).min(lo[i]);
                nhi[i] = nhi[i].max(m.ratio * hi[i] + m.offset[i]).max(hi[i]);
            }
        }
        if nlo == lo && nhi == hi {
            break;
        }
        lo = nlo;
        hi = nhi;
    }
    let label = format!("ifs({} maps, depth {})", spec.maps.len(), spec.depth);
    Ok(IfsSampler {
        start,
        bounds: Bounds::new(lo, hi),
        spec,
        label,
    })
}

impl SetSampler for IfsSampler {
    fn draw(&self, rng: &mut SimRng) -> HPoint {
        let n = self.spec.maps.len();
        let mut p = self.start;
        for _ in 0..self.spec.depth {
            p = self.spec.maps[rng.gen_range(0..n)].apply(p);
        }
        HPoint::from_array(p)
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn label(&self) -> &str {
        &self.label
    }
}
