//! Horizontal lines, unit horizontal segments and their codes.
//!
//! A non-steep horizontal line is `l(a, b, d) = {(s, b s + a, -a s / 2 + d)}`;
//! the unit segment `l^eps(a, b, d)` restricts `s` to the open interval
//! `(eps, eps + 1/sqrt(b^2 + 1))`. Steep directions use the mirrored
//! `y`-parameterised chart `{(b s + a, s, a s / 2 + d)}`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fmath;
use crate::hgroup::{mul, HPoint};
use crate::{Error, Result};

/// `sqrt(3)`, the slope cutoff of the clean chart.
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Which coordinate parameterises a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Chart {
    /// `s` is the `x` coordinate; slope `b = dy/dx`.
    #[cfg_attr(feature = "serde", serde(rename = "x"))]
    XParam,
    /// `s` is the `y` coordinate; `b = dx/dy`.
    #[cfg_attr(feature = "serde", serde(rename = "y"))]
    YParam,
}

/// Code `(a, b, d, eps)` of a horizontal unit segment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SegmentCode {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub eps: f64,
    pub chart: Chart,
}

/// Result of [`slab_crossing`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Left,
    Right,
    Both,
    None,
}

impl Crossing {
    pub fn reaches_left(self) -> bool {
        matches!(self, Crossing::Left | Crossing::Both)
    }

    pub fn reaches_right(self) -> bool {
        matches!(self, Crossing::Right | Crossing::Both)
    }
}

impl SegmentCode {
    pub const fn new(a: f64, b: f64, d: f64, eps: f64) -> Self {
        SegmentCode {
            a,
            b,
            d,
            eps,
            chart: Chart::XParam,
        }
    }

    pub const fn new_y(a: f64, b: f64, d: f64, eps: f64) -> Self {
        SegmentCode {
            a,
            b,
            d,
            eps,
            chart: Chart::YParam,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.d.is_finite() && self.eps.is_finite()
    }

    /// Length `1/sqrt(b^2 + 1)` of the parameter interval.
    #[inline]
    pub fn param_len(&self) -> f64 {
        1.0 / fmath::sqrt(self.b * self.b + 1.0)
    }

    /// Open parameter interval `(eps, eps + 1/sqrt(b^2 + 1))`.
    #[inline]
    pub fn param_interval(&self) -> (f64, f64) {
        (self.eps, self.eps + self.param_len())
    }

    /// Point of the full line at parameter `s`, in either chart.
    #[inline]
    pub fn point_at(&self, s: f64) -> HPoint {
        match self.chart {
            Chart::XParam => HPoint::new(s, self.b * s + self.a, -0.5 * self.a * s + self.d),
            Chart::YParam => HPoint::new(self.b * s + self.a, s, 0.5 * self.a * s + self.d),
        }
    }

    /// Unoriented planar direction in `[0, pi)`.
    pub fn direction_angle(&self) -> f64 {
        let raw = match self.chart {
            Chart::XParam => fmath::atan(self.b),
            Chart::YParam => fmath::atan2(1.0, self.b),
        };
        normalize_angle(raw)
    }

    /// Range of `x` values covered by the open segment.
    pub fn x_range(&self) -> (f64, f64) {
        let (lo, hi) = self.param_interval();
        match self.chart {
            Chart::XParam => (lo, hi),
            Chart::YParam => {
                let (u, v) = (self.b * lo + self.a, self.b * hi + self.a);
                if u <= v {
                    (u, v)
                } else {
                    (v, u)
                }
            }
        }
    }

    fn key(&self) -> (u64, u64, u64, u64, Chart) {
        // +0.0 folds -0.0 onto 0.0 so the key follows f64 equality
        let k = |v: f64| (v + 0.0).to_bits();
        (k(self.a), k(self.b), k(self.d), k(self.eps), self.chart)
    }
}

/// Reduces an angle to `[0, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let pi = core::f64::consts::PI;
    let mut r = theta - pi * fmath::floor(theta / pi);
    if r >= pi {
        r -= pi;
    }
    if r < 0.0 {
        r = 0.0;
    }
    r
}

/// A finite set of segment codes standing in for the segments of a set.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CodeFamily {
    pub label: String,
    codes: Vec<SegmentCode>,
}

impl CodeFamily {
    pub fn empty(label: impl Into<String>) -> Self {
        CodeFamily {
            label: label.into(),
            codes: Vec::new(),
        }
    }

    /// Builds a family, rejecting non-finite or duplicate codes.
    pub fn new(label: impl Into<String>, codes: Vec<SegmentCode>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, c) in codes.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::invalid("code family", alloc::format!("code {i} has a non-finite field")));
            }
            if !seen.insert(c.key()) {
                return Err(Error::DuplicateCode { index: i });
            }
        }
        Ok(CodeFamily {
            label: label.into(),
            codes,
        })
    }

    /// Builds a family from codes, silently dropping repeats.
    pub fn dedup(label: impl Into<String>, codes: impl IntoIterator<Item = SegmentCode>) -> Self {
        let mut seen = BTreeSet::new();
        let codes = codes.into_iter().filter(|c| seen.insert(c.key())).collect();
        CodeFamily {
            label: label.into(),
            codes,
        }
    }

    pub fn codes(&self) -> &[SegmentCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for CodeFamily {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> core::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            label: String,
            codes: Vec<SegmentCode>,
        }
        let raw = Raw::deserialize(de)?;
        CodeFamily::new(raw.label, raw.codes).map_err(serde::de::Error::custom)
    }
}

/// Point `(s, b s + a, -a s / 2 + d)` of the line coded by `code`.
pub fn line_point(code: &SegmentCode, s: f64) -> Result<HPoint> {
    require_x(code, "line_point")?;
    Ok(code.point_at(s))
}

fn require_x(code: &SegmentCode, op: &'static str) -> Result<()> {
    match code.chart {
        Chart::XParam => Ok(()),
        Chart::YParam => Err(Error::WrongChart { op }),
    }
}

/// Code of the left translate `q · J_b` (x chart).
pub fn code_from_translation(q: HPoint, b: f64) -> SegmentCode {
    let a = q.y - b * q.x;
    let d = q.t + 0.5 * a * q.x;
    let eps = q.x - 0.5 / fmath::sqrt(b * b + 1.0);
    SegmentCode::new(a, b, d, eps)
}

/// Code of the left translate of the segment `tau -> (b tau, tau, 0)`,
/// centred at `q`, in the `y` chart.
pub fn code_from_translation_y(q: HPoint, b: f64) -> SegmentCode {
    let a = q.x - b * q.y;
    let d = q.t - 0.5 * a * q.y;
    let eps = q.y - 0.5 / fmath::sqrt(b * b + 1.0);
    SegmentCode::new_y(a, b, d, eps)
}

/// Point `q · (tau, b tau, 0)` by direct group multiplication.
pub fn translate_direction(q: HPoint, b: f64, tau: f64) -> HPoint {
    mul(q, HPoint::new(tau, b * tau, 0.0))
}

/// The two (excluded) endpoints of the segment.
pub fn segment_endpoints(code: &SegmentCode) -> Result<(HPoint, HPoint)> {
    require_x(code, "segment_endpoints")?;
    let (lo, hi) = code.param_interval();
    Ok((code.point_at(lo), code.point_at(hi)))
}

/// Projection of the segment to the `x` axis.
pub fn x_projection_interval(code: &SegmentCode) -> Result<(f64, f64)> {
    require_x(code, "x_projection_interval")?;
    Ok(code.param_interval())
}

/// Checks the horizontality ODE `t' = (x y' - y x') / 2` by central
/// differences at every interior sample.
pub fn is_horizontal(samples: &[(f64, HPoint)], tol: f64) -> Result<bool> {
    if samples.len() < 3 {
        return Err(Error::invalid(
            "is_horizontal",
            alloc::format!("need at least 3 samples, got {}", samples.len()),
        ));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("is_horizontal", "sample parameters must be strictly increasing"));
    }
    for w in samples.windows(3) {
        let (s0, p0) = w[0];
        let (_, p) = w[1];
        let (s2, p2) = w[2];
        let h = s2 - s0;
        let dx = (p2.x - p0.x) / h;
        let dy = (p2.y - p0.y) / h;
        let dt = (p2.t - p0.t) / h;
        let residual = dt - 0.5 * (p.x * dy - p.y * dx);
        if !(residual.abs() <= tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which of the planes `x = c0 - 1/4`, `x = c0 + 1/4` the open segment meets.
pub fn slab_crossing(code: &SegmentCode, c0: f64) -> Result<Crossing> {
    let (lo, hi) = x_projection_interval(code)?;
    let inside = |c: f64| lo < c && c < hi;
    Ok(match (inside(c0 - 0.25), inside(c0 + 0.25)) {
        (true, true) => Crossing::Both,
        (true, false) => Crossing::Left,
        (false, true) => Crossing::Right,
        (false, false) => Crossing::None,
    })
}
