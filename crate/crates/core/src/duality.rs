//! Line-space duality: plane sections of a union of horizontal segments
//! seen as Euclidean projections of its code set.
//!
//! The section of the line `l(a, b, d)` by `{x = c}` is `(c, b c + a, -a c / 2 + d)`;
//! translating it to `{x = 0}` by `(-c, 0, 0)` leaves the height
//! `<(-c, -c^2/2, 1), (a, b, d)>`, which is `(1 + c^2/2)` times the scalar
//! projection of `(a, b, d)` onto the unit vector `u1(c)` along the same
//! direction. The rotation [`rotation_r`] carries `u1(c)` to the cone
//! direction `gamma(theta(c))`, which is what makes a Marstrand-type
//! projection theorem applicable to the family of sections.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::fmath;
use crate::hgroup::{self, HPoint};
use crate::hlines::{Chart, CodeFamily, SegmentCode, SQRT_3};
use crate::{Error, Result};

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// A vector of `R^3`: a code point `(a, b, d)` or a projection direction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn y(self) -> f64 {
        self.0[1]
    }

    #[inline]
    pub fn z(self) -> f64 {
        self.0[2]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn norm(self) -> f64 {
        fmath::sqrt(self.dot(self))
    }

    pub fn max_abs_diff(self, o: Vec3) -> f64 {
        (0..3).map(|i| (self.0[i] - o.0[i]).abs()).fold(0.0, f64::max)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3(core::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3(core::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3(self.0.map(|v| -v))
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3(v.0.map(|c| self * c))
    }
}

/// Which coordinates of `(a, b, d, eps)` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    /// `(a, b, d)`.
    P123,
    /// `b`.
    P2,
}

/// Output of [`project_family`]; sorted and free of repeats.
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    P123(Vec<Vec3>),
    P2(Vec<f64>),
}

fn require_x(code: &SegmentCode, op: &'static str) -> Result<()> {
    if code.chart == Chart::XParam {
        Ok(())
    } else {
        Err(Error::WrongChart { op })
    }
}

/// Whether the open segment meets the plane `{x = c}`.
pub fn meets_plane(code: &SegmentCode, c: f64) -> Result<bool> {
    require_x(code, "meets_plane")?;
    let (lo, hi) = code.param_interval();
    Ok(lo < c && c < hi)
}

/// The subfamily of `x` chart codes with `|b| < sqrt 3` meeting `{x = c}`.
pub fn restrict_family(family: &CodeFamily, c: f64) -> CodeFamily {
    let codes = family.codes().iter().copied().filter(|code| {
        code.chart == Chart::XParam && code.b.abs() < SQRT_3 && {
            let (lo, hi) = code.param_interval();
            lo < c && c < hi
        }
    });
    CodeFamily::dedup(alloc::format!("{}|x={c}", family.label), codes)
}

/// Orthogonal projection of the code set to `(a, b, d)` or to `b`.
pub fn project_family(family: &CodeFamily, axes: Axes) -> Result<Projection> {
    for c in family.codes() {
        require_x(c, "project_family")?;
    }
    let key = |v: f64| (v + 0.0).to_bits();
    Ok(match axes {
        Axes::P123 => {
            let mut seen = BTreeSet::new();
            let mut out: Vec<Vec3> = family
                .codes()
                .iter()
                .filter(|c| seen.insert((key(c.a), key(c.b), key(c.d))))
                .map(|c| Vec3::new(c.a, c.b, c.d))
                .collect();
            out.sort_by(|p, q| {
                p.0.iter()
                    .zip(&q.0)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(core::cmp::Ordering::Equal)
            });
            Projection::P123(out)
        }
        Axes::P2 => {
            let mut out: Vec<f64> = family.codes().iter().map(|c| c.b + 0.0).collect();
            out.sort_by(f64::total_cmp);
            out.dedup();
            Projection::P2(out)
        }
    })
}

/// Section points `(c, b c + a, -a c / 2 + d)` of the lines coded by `set`.
pub fn slice_points(set: &[Vec3], c: f64) -> Vec<HPoint> {
    set.iter()
        .map(|v| {
            let [a, b, d] = v.0;
            HPoint::new(c, b * c + a, -0.5 * a * c + d)
        })
        .collect()
}

/// Left translation by `(-c, 0, 0)` of points lying on `{x = c}`.
pub fn translate_to_yot(points: &[HPoint], c: f64) -> Result<Vec<HPoint>> {
    let shift = HPoint::new(-c, 0.0, 0.0);
    points
        .iter()
        .map(|p| {
            if (p.x - c).abs() > 1e-12 {
                return Err(Error::OffPlane {
                    op: "translate_to_yot",
                    expected_x: c,
                    got_x: p.x,
                });
            }
            Ok(hgroup::mul(shift, *p))
        })
        .collect()
}

/// The map `(0, y, t) -> t` on the plane `{x = 0}`.
pub fn phi_heights(points: &[HPoint]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            if p.x.abs() > 1e-12 {
                return Err(Error::OffPlane {
                    op: "phi_heights",
                    expected_x: 0.0,
                    got_x: p.x,
                });
            }
            Ok(p.t)
        })
        .collect()
}

/// `(-c, -c^2/2, 1)`, whose norm is `1 + c^2/2`.
#[inline]
pub fn dual_direction(c: f64) -> Vec3 {
    Vec3::new(-c, -0.5 * c * c, 1.0)
}

/// The unit vector `u1(c)` along [`dual_direction`].
#[inline]
pub fn dual_unit(c: f64) -> Vec3 {
    (1.0 / (1.0 + 0.5 * c * c)) * dual_direction(c)
}

/// Height `<(-c, -c^2/2, 1), v>` of the section at `x = c`, translated to `{x = 0}`.
#[inline]
pub fn dual_height(v: Vec3, c: f64) -> f64 {
    dual_direction(c).dot(v)
}

/// Signed coordinate of the orthogonal projection of `w` onto the line spanned by the unit `u`.
pub fn scalar_proj(u: Vec3, w: Vec3) -> Result<f64> {
    let n = u.norm();
    if !((n - 1.0).abs() <= 1e-12) {
        return Err(Error::invalid("scalar_proj", alloc::format!("direction has norm {n}, expected 1")));
    }
    Ok(w.dot(u))
}

/// `(cos theta, sin theta, 1) / sqrt 2`.
#[inline]
pub fn gamma_theta(theta: f64) -> Vec3 {
    Vec3::new(
        fmath::cos(theta) * FRAC_1_SQRT_2,
        fmath::sin(theta) * FRAC_1_SQRT_2,
        FRAC_1_SQRT_2,
    )
}

/// `(cos, sin)` of `theta(c)` in closed form.
#[inline]
pub fn theta_of_c_cos_sin(c: f64) -> (f64, f64) {
    let den = 2.0 + c * c;
    (-2.0 * core::f64::consts::SQRT_2 * c / den, (2.0 - c * c) / den)
}

/// The angle in `[0, 2 pi)` with `cos = -2 sqrt2 c / (2 + c^2)`, `sin = (2 - c^2) / (2 + c^2)`.
pub fn theta_of_c(c: f64) -> f64 {
    let (cos, sin) = theta_of_c_cos_sin(c);
    let t = fmath::atan2(sin, cos);
    if t < 0.0 {
        t + 2.0 * core::f64::consts::PI
    } else {
        t
    }
}

/// `(x, y, z) -> (x, (y + z) / sqrt 2, (z - y) / sqrt 2)`.
#[inline]
pub fn rotation_r(p: Vec3) -> Vec3 {
    let [x, y, z] = p.0;
    Vec3::new(x, FRAC_1_SQRT_2 * (y + z), FRAC_1_SQRT_2 * (z - y))
}

/// Residual of the parabolic cone `x^2 = -2 y z`.
#[inline]
pub fn cone_c1_residual(p: Vec3) -> f64 {
    let [x, y, z] = p.0;
    x * x + 2.0 * y * z
}

/// Residual of the round cone `x^2 + y^2 = z^2`.
#[inline]
pub fn cone_c2_residual(p: Vec3) -> f64 {
    let [x, y, z] = p.0;
    x * x + y * y - z * z
}

/// `|<w, u1(c)> - <R w, gamma(theta(c))>|`; zero up to rounding.
pub fn verify_projection_identity(c: f64, w: Vec3) -> f64 {
    let lhs = w.dot(dual_unit(c));
    let rhs = rotation_r(w).dot(gamma_theta(theta_of_c(c)));
    (lhs - rhs).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hlines::slab_crossing;
    use crate::hlines::Crossing;
    use crate::setgen::{kakeya_union_builder, Placement};
    use alloc::vec;
    use core::f64::consts::{PI, SQRT_2};
    use proptest::prelude::*;

    const H: f64 = 0.5;

    fn unit_x() -> SegmentCode {
        SegmentCode::new(0.0, 0.0, 0.0, -H)
    }

    #[test]
    fn meets_plane_examples() {
        assert!(meets_plane(&unit_x(), 0.0).unwrap());
        assert!(!meets_plane(&unit_x(), 0.5).unwrap());
        assert!(meets_plane(&unit_x(), 0.3).unwrap());
        assert_eq!(slab_crossing(&unit_x(), 0.3).unwrap(), Crossing::Left);
        assert!(meets_plane(&SegmentCode::new_y(0.0, 0.0, 0.0, -H), 0.0).is_err());
    }

    #[test]
    fn restrict_examples() {
        assert!(restrict_family(&CodeFamily::empty("e"), 0.0).is_empty());
        let steep = CodeFamily::new(
            "steep",
            (0..10).map(|i| SegmentCode::new(i as f64, 2.0, 0.0, -0.2)).collect(),
        )
        .unwrap();
        assert!(restrict_family(&steep, 0.0).is_empty());
        let plane = kakeya_union_builder(60, Placement::Origin, 0).unwrap();
        let r = restrict_family(&plane, 0.0);
        let expected = plane
            .codes()
            .iter()
            .filter(|c| c.chart == Chart::XParam && c.b.abs() < SQRT_3)
            .count();
        assert_eq!(r.len(), expected);
    }

    #[test]
    fn projection_examples() {
        let f = CodeFamily::new("one", vec![SegmentCode::new(1.0, 0.0, 2.0, 0.1)]).unwrap();
        assert_eq!(project_family(&f, Axes::P123).unwrap(), Projection::P123(vec![Vec3::new(1.0, 0.0, 2.0)]));
        assert_eq!(project_family(&f, Axes::P2).unwrap(), Projection::P2(vec![0.0]));
        let two = CodeFamily::new(
            "two",
            vec![SegmentCode::new(1.0, 0.0, 2.0, 0.1), SegmentCode::new(1.0, 0.0, 2.0, 0.3)],
        )
        .unwrap();
        let Projection::P123(v) = project_family(&two, Axes::P123).unwrap() else { panic!() };
        assert_eq!(v.len(), 1);

        let m = 24;
        let fam = kakeya_union_builder(m, Placement::Origin, 0).unwrap();
        let kept = restrict_family(&fam, 0.0);
        let Projection::P2(bs) = project_family(&kept, Axes::P2).unwrap() else { panic!() };
        let mut want: Vec<f64> = (0..m)
            .map(|i| i as f64 * PI / m as f64)
            .map(|t| if t > PI / 2.0 { t - PI } else { t })
            .filter(|t| t.abs() < PI / 3.0 - 1e-12)
            .map(libm::tan)
            .collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(bs.len(), want.len());
        for (a, b) in bs.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
        let y = CodeFamily::new("y", vec![SegmentCode::new_y(0.0, 0.0, 0.0, 0.0)]).unwrap();
        assert!(project_family(&y, Axes::P2).is_err());
    }

    #[test]
    fn slice_translate_height_examples() {
        assert_eq!(slice_points(&[Vec3::ZERO], 1.0), vec![HPoint::new(1.0, 0.0, 0.0)]);
        let s = slice_points(&[Vec3::new(1.0, 0.0, 0.0)], 1.0);
        assert_eq!(s, vec![HPoint::new(1.0, 1.0, -0.5)]);
        assert_eq!(translate_to_yot(&s, 1.0).unwrap(), vec![HPoint::new(0.0, 1.0, -1.0)]);
        let p = vec![HPoint::new(0.0, 2.0, 3.0)];
        assert_eq!(translate_to_yot(&p, 0.0).unwrap(), p);
        assert!(translate_to_yot(&p, 1.0).is_err());
        assert_eq!(phi_heights(&[HPoint::new(0.0, 5.0, 7.0)]).unwrap(), vec![7.0]);
        assert!(phi_heights(&[HPoint::new(1.0, 5.0, 7.0)]).is_err());
        assert_eq!(dual_height(Vec3::new(1.0, 0.0, 0.0), 1.0), -1.0);
        assert_eq!(dual_height(Vec3::new(3.0, 4.0, 5.0), 0.0), 5.0);

        // section points are the line points at s = c
        let code = SegmentCode::new(0.7, -0.4, 1.3, 0.0);
        let v = Vec3::new(code.a, code.b, code.d);
        assert_eq!(slice_points(&[v], 0.9)[0], code.point_at(0.9));
    }

    #[test]
    fn phi_is_one_lipschitz_on_same_plane_pairs() {
        use rand::Rng;
        let mut rng = crate::rng::stream(4, 0);
        for _ in 0..10_000 {
            let p = HPoint::new(0.0, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let q = HPoint::new(0.0, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let image = 2.0 * (p.t - q.t).abs().sqrt();
            let on_axis = hgroup::dist(HPoint::new(0.0, 0.0, p.t), HPoint::new(0.0, 0.0, q.t));
            assert!((image - on_axis).abs() < 1e-12);
            assert!(on_axis <= hgroup::dist(p, q) + 1e-12);
        }
    }

    #[test]
    fn projection_direction_examples() {
        assert_eq!(scalar_proj(Vec3::new(1.0, 0.0, 0.0), Vec3::new(3.0, 4.0, 5.0)).unwrap(), 3.0);
        assert_eq!(scalar_proj(Vec3::new(0.0, 1.0, 0.0), Vec3::new(3.0, 0.0, 5.0)).unwrap(), 0.0);
        assert!(scalar_proj(Vec3::new(1.0, 1.0, 0.0), Vec3::ZERO).is_err());
        let g = gamma_theta(0.0);
        assert!(g.max_abs_diff(Vec3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2)) < 1e-16);
        let g = gamma_theta(PI / 2.0);
        assert!(g.max_abs_diff(Vec3::new(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2)) < 1e-16);
        assert!((theta_of_c(0.0) - PI / 2.0).abs() < 1e-15);
        assert!((theta_of_c(SQRT_2) - PI).abs() < 1e-15);
        assert!(theta_of_c(5.0) >= 0.0 && theta_of_c(-5.0) < 2.0 * PI);
    }

    #[test]
    fn rotation_examples() {
        let r = rotation_r(Vec3::new(0.0, 1.0, 0.0));
        assert!(r.max_abs_diff(Vec3::new(0.0, SQRT_2 / 2.0, -SQRT_2 / 2.0)) < 1e-16);
        let p = Vec3::new(SQRT_2, -1.0, 1.0);
        assert!(cone_c1_residual(p).abs() < 1e-15);
        let rp = rotation_r(p);
        assert!(rp.max_abs_diff(Vec3::new(SQRT_2, 0.0, SQRT_2)) < 1e-15);
        assert!(cone_c2_residual(rp).abs() < 1e-15);
    }

    #[test]
    fn identity_examples() {
        assert!(verify_projection_identity(0.0, Vec3::new(0.0, 0.0, 1.0)) < 1e-15);
        assert_eq!(verify_projection_identity(1.7, Vec3::ZERO), 0.0);
    }

    fn small() -> impl Strategy<Value = f64> {
        -10.0f64..10.0
    }

    proptest! {
        #[test]
        fn chain_equals_dual_height(a in small(), b in small(), d in small(), c in small()) {
            let v = Vec3::new(a, b, d);
            let t = phi_heights(&translate_to_yot(&slice_points(&[v], c), c).unwrap()).unwrap()[0];
            let h = dual_height(v, c);
            prop_assert!((t - h).abs() <= 1e-12 * (1.0 + h.abs()));
        }

        #[test]
        fn dual_direction_norm(c in small()) {
            prop_assert!((dual_direction(c).norm() - (1.0 + 0.5 * c * c)).abs() <= 1e-12 * (1.0 + c * c));
        }

        #[test]
        fn theta_on_unit_circle(c in small()) {
            let (co, si) = theta_of_c_cos_sin(c);
            prop_assert!((co * co + si * si - 1.0).abs() <= 1e-12);
            let t = theta_of_c(c);
            prop_assert!((libm::cos(t) - co).abs() <= 1e-12 && (libm::sin(t) - si).abs() <= 1e-12);
        }

        #[test]
        fn rotation_is_isometry(p in (small(), small(), small()), q in (small(), small(), small())) {
            let (p, q) = (Vec3::new(p.0, p.1, p.2), Vec3::new(q.0, q.1, q.2));
            prop_assert!((rotation_r(p).dot(rotation_r(q)) - p.dot(q)).abs() <= 1e-12);
        }

        #[test]
        fn rotation_maps_dual_unit_to_gamma(c in small()) {
            prop_assert!(rotation_r(dual_unit(c)).max_abs_diff(gamma_theta(theta_of_c(c))) <= 1e-12);
            // parabola direction lies on C1, image on C2
            prop_assert!(cone_c1_residual(dual_direction(c)).abs() <= 1e-12);
            prop_assert!(cone_c2_residual(rotation_r(dual_direction(c))).abs() <= 1e-12 * (1.0 + c * c).powi(2));
        }

        #[test]
        fn projection_identity(c in small(), w in (small(), small(), small())) {
            prop_assert!(verify_projection_identity(c, Vec3::new(w.0, w.1, w.2)) <= 1e-12);
        }

        #[test]
        fn meets_plane_matches_interval(b in -1.7f64..1.7, e in small(), c in small()) {
            let code = SegmentCode::new(0.0, b, 0.0, e);
            let (lo, hi) = crate::hlines::x_projection_interval(&code).unwrap();
            prop_assert_eq!(meets_plane(&code, c).unwrap(), lo < c && c < hi);
        }
    }
}
