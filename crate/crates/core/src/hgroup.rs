//! The first Heisenberg group in exponential coordinates.
//!
//! Points are `(x, y, t)` with the product
//! `(x, y, t)(x', y', t') = (x + x', y + y', t + t' + (x y' - x' y) / 2)`,
//! the Korányi gauge `((x^2 + y^2)^2 + 16 t^2)^(1/4)` and the left-invariant
//! metric `d(p, q) = |q^-1 p|`.

use core::ops::Mul;

use crate::fmath;
use crate::{Error, Result};

/// A point `(x, y, t)` of the first Heisenberg group.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint {
        x: 0.0,
        y: 0.0,
        t: 0.0,
    };

    #[inline]
    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        HPoint { x, y, t }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.t]
    }

    #[inline]
    pub fn from_array(a: [f64; 3]) -> Self {
        HPoint::new(a[0], a[1], a[2])
    }
}

impl From<[f64; 3]> for HPoint {
    fn from(a: [f64; 3]) -> Self {
        HPoint::from_array(a)
    }
}

impl Mul for HPoint {
    type Output = HPoint;

    #[inline]
    fn mul(self, rhs: HPoint) -> HPoint {
        mul(self, rhs)
    }
}

/// Group product `p · q`.
#[inline]
pub fn mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint {
        x: p.x + q.x,
        y: p.y + q.y,
        t: p.t + q.t + 0.5 * (p.x * q.y - q.x * p.y),
    }
}

/// Group inverse. The symplectic term vanishes on `(p, -p)`, so this is negation.
#[inline]
pub fn inv(p: HPoint) -> HPoint {
    HPoint::new(-p.x, -p.y, -p.t)
}

/// Fourth power of the Korányi gauge, `(x^2 + y^2)^2 + 16 t^2`.
///
/// Comparisons against `delta^4` avoid the quartic root in hot loops.
#[inline]
pub fn knorm4(p: HPoint) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    r2 * r2 + 16.0 * p.t * p.t
}

/// Korányi gauge `((x^2 + y^2)^2 + 16 t^2)^(1/4)`.
#[inline]
pub fn knorm(p: HPoint) -> f64 {
    fmath::sqrt(fmath::sqrt(knorm4(p)))
}

/// `q^-1 · p` without building the inverse explicitly.
#[inline]
pub fn left_difference(p: HPoint, q: HPoint) -> HPoint {
    HPoint {
        x: p.x - q.x,
        y: p.y - q.y,
        t: p.t - q.t + 0.5 * (q.y * p.x - q.x * p.y),
    }
}

/// Korányi distance `|q^-1 p|`.
#[inline]
pub fn dist(p: HPoint, q: HPoint) -> f64 {
    knorm(left_difference(p, q))
}

/// Fourth power of the Korányi distance.
#[inline]
pub fn dist4(p: HPoint, q: HPoint) -> f64 {
    knorm4(left_difference(p, q))
}

/// Heisenberg dilation `(r x, r y, r^2 t)`; requires `r > 0`.
pub fn dilate(r: f64, p: HPoint) -> Result<HPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("dilate", alloc::format!("factor must be > 0, got {r}")));
    }
    Ok(HPoint::new(r * p.x, r * p.y, r * r * p.t))
}

/// Euclidean distance in the `(x, y, t)` coordinates.
#[inline]
pub fn euclid_dist(p: HPoint, q: HPoint) -> f64 {
    let (dx, dy, dt) = (p.x - q.x, p.y - q.y, p.t - q.t);
    fmath::sqrt(dx * dx + dy * dy + dt * dt)
}
