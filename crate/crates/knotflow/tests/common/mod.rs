//! Shared fixtures: pinned oracle values and generator helpers.
//!
//! The `M_REF` energies come from the Gamma-function continuation of the
//! one-dimensional circle reduction evaluated in 50-digit arithmetic; the
//! symbol limits `C_INF` from high-precision quadrature of the exact
//! large-mode reduction. Both were frozen from an independent oracle run.

#![allow(dead_code)]

use knotflow::vec3::V3;
use knotflow::{ClosedCurve, Real};

/// Unit-length-circle energies `m_alpha`.
pub const M_REF: [(f64, f64); 4] = [
    (2.1, 4.980418572661993),
    (2.2, 6.250968527651323),
    (2.5, 13.504887158907511),
    (2.8, 43.374116329732033),
];

/// Large-mode limits of `q_alpha(k) / (2 pi k)^{alpha+1}`.
pub const C_INF: [(f64, f64); 4] = [
    (2.1, 0.9337822055169499),
    (2.2, 0.8517205655714932),
    (2.5, 0.7639248075065906),
    (2.8, 1.1398683758597442),
];

/// Gradient magnitude on the unit circle at `alpha = 2.5`:
/// `(alpha - 2) (2 pi)^{1 - alpha} m_alpha`.
pub const CIRCLE_H_25: f64 = 0.4287371943003397;

/// Critical circle radius at `alpha = 2.5`, `lambda = 0.1`.
pub const R_STAR_25_01: f64 = 2.639129944468265;

/// `lambda` making the unit circle critical at `alpha = 2.5`.
pub const LAMBDA_UNIT_25: f64 = 0.4287371943003397;

pub fn lookup(table: &[(f64, f64)], alpha: f64) -> f64 {
    table
        .iter()
        .find(|(a, _)| (*a - alpha).abs() < 1e-12)
        .expect("alpha not in fixture table")
        .1
}

/// Sample a smooth band-limited direction field from seeded coefficients.
pub fn direction_field<R: Real>(seed: u64, n: usize, band: u32) -> Vec<V3<R>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut field = vec![[R::zero(); 3]; n];
    for k in 0..=band {
        let mut amp = [[0.0f64; 2]; 3];
        for a in amp.iter_mut() {
            a[0] = rng.gen_range(-1.0..1.0);
            a[1] = rng.gen_range(-1.0..1.0);
        }
        for (j, f) in field.iter_mut().enumerate() {
            let x = 2.0 * std::f64::consts::PI * k as f64 * j as f64 / n as f64;
            for c in 0..3 {
                f[c] += R::lit(amp[c][0] * x.cos() + amp[c][1] * x.sin());
            }
        }
    }
    field
}

/// Planar variant (third component zero).
pub fn direction_field_2d<R: Real>(seed: u64, n: usize, band: u32) -> Vec<V3<R>> {
    let mut f = direction_field::<R>(seed, n, band);
    for v in &mut f {
        v[2] = R::zero();
    }
    f
}

/// L^2(ds)-norm of a field over a geometry.
pub fn field_l2<R: Real>(geom: &knotflow::Geometry<R>, f: &[V3<R>]) -> R {
    let n = geom.n();
    let mut acc = R::zero();
    for (v, &q) in f.iter().zip(&geom.speed) {
        acc += knotflow::vec3::norm_sq(v) * q;
    }
    (acc / R::lit(n as f64)).sqrt()
}

/// The standard trefoil used across tests.
pub fn trefoil(n: usize) -> ClosedCurve<f64> {
    knotflow::torus_knot(2, 3, 2.0, 1.0, n).unwrap()
}
