//! Randomised residual checks of the duality identities.

use heiskakeya_core::duality::{self, Vec3};
use heiskakeya_core::rng::{child_seed, stream};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Largest residual seen for each identity.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DualityResiduals {
    pub samples: usize,
    pub seed: u64,
    /// `| |(-c, -c^2/2, 1)| - (1 + c^2/2) |`, relative to `1 + c^2/2`.
    pub dual_norm: f64,
    /// `| cos^2 + sin^2 - 1 |` at `theta(c)`.
    pub theta_circle: f64,
    /// `| |R w| - |w| |`.
    pub rotation_isometry: f64,
    /// `C2` residual of `R` applied to a `C1` point, relative to its squared norm.
    pub cone_map: f64,
    /// `max |R(u1(c)) - gamma(theta(c))|`.
    pub rotated_direction: f64,
    /// The projection identity.
    pub projection: f64,
    pub max_residual: f64,
}

const CHUNK: usize = 1 << 14;

fn sample_w(rng: &mut impl Rng) -> Vec3 {
    let w = Vec3::new(rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0));
    let n = w.norm();
    if n > 10.0 {
        (10.0 / n) * w
    } else {
        w
    }
}

fn chunk(seed: u64, index: usize, n: usize) -> DualityResiduals {
    let mut rng = stream(child_seed(seed, index as u64), 0);
    let mut r = DualityResiduals::default();
    for _ in 0..n {
        let c: f64 = rng.gen_range(-10.0..=10.0);
        let w = sample_w(&mut rng);
        let scale = 1.0 + 0.5 * c * c;
        r.dual_norm = r.dual_norm.max((duality::dual_direction(c).norm() - scale).abs() / scale);
        let (co, si) = duality::theta_of_c_cos_sin(c);
        r.theta_circle = r.theta_circle.max((co * co + si * si - 1.0).abs());
        let t = duality::theta_of_c(c);
        r.theta_circle = r.theta_circle.max((t.cos() - co).abs()).max((t.sin() - si).abs());
        r.rotation_isometry = r.rotation_isometry.max((duality::rotation_r(w).norm() - w.norm()).abs());
        let p = duality::dual_direction(c);
        r.cone_map = r
            .cone_map
            .max(duality::cone_c2_residual(duality::rotation_r(p)).abs() / p.dot(p));
        r.rotated_direction = r
            .rotated_direction
            .max(duality::rotation_r(duality::dual_unit(c)).max_abs_diff(duality::gamma_theta(t)));
        r.projection = r.projection.max(duality::verify_projection_identity(c, w));
    }
    r.samples = n;
    r
}

/// Checks every identity on `samples` seeded draws with `|c| <= 10`, `|w| <= 10`.
pub fn duality_residuals(samples: usize, seed: u64) -> DualityResiduals {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<DualityResiduals> = (0..chunks)
        .into_par_iter()
        .map(|i| chunk(seed, i, CHUNK.min(samples - i * CHUNK)))
        .collect();
    let mut out = DualityResiduals {
        samples,
        seed,
        ..Default::default()
    };
    for p in parts {
        out.dual_norm = out.dual_norm.max(p.dual_norm);
        out.theta_circle = out.theta_circle.max(p.theta_circle);
        out.rotation_isometry = out.rotation_isometry.max(p.rotation_isometry);
        out.cone_map = out.cone_map.max(p.cone_map);
        out.rotated_direction = out.rotated_direction.max(p.rotated_direction);
        out.projection = out.projection.max(p.projection);
    }
    out.max_residual = [
        out.dual_norm,
        out.theta_circle,
        out.rotation_isometry,
        out.cone_map,
        out.rotated_direction,
        out.projection,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out
}
