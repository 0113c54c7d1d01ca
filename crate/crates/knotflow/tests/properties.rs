//! Property tests for the structural invariants.

mod common;

use knotflow::vec3;
use knotflow::{
    fourier_perturbed_circle, geometry, heat_semigroup_apply, ohara_energy,
    reparameterize_arclength, EnergyParams,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn intrinsic_distance_symmetric_and_bounded(
        x in 0.0f64..1.0,
        y in 0.0f64..1.0,
        seed in 0u64..50,
    ) {
        let c = fourier_perturbed_circle(seed, 0.05, 5, 64).unwrap();
        let g = geometry(&c).unwrap();
        let d1 = g.intrinsic_distance(x, y);
        let d2 = g.intrinsic_distance(y, x);
        prop_assert!((d1 - d2).abs() < 1e-12 * g.length);
        prop_assert!(d1 <= g.length / 2.0 + 1e-12 * g.length);
        prop_assert!(d1 >= 0.0);
    }

    #[test]
    fn chord_never_exceeds_arc(seed in 0u64..30) {
        let c = fourier_perturbed_circle(seed, 0.06, 5, 64).unwrap();
        let g = geometry(&c).unwrap();
        let n = g.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let chord = vec3::dist(&g.points()[i], &g.points()[j]);
                let arc = g.intrinsic_distance_idx(i, j);
                prop_assert!(chord <= arc * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn semigroup_law_random_times(
        t in 0.0f64..0.2,
        u in 0.0f64..0.2,
        s in 1.1f64..3.9,
    ) {
        let n = 64;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let x = j as f64 / n as f64;
                (2.0 * std::f64::consts::PI * x).sin()
                    + 0.5 * (2.0 * std::f64::consts::PI * 3.0 * x).cos()
            })
            .collect();
        let two = heat_semigroup_apply(&heat_semigroup_apply(&f, s, t).unwrap(), s, u).unwrap();
        let one = heat_semigroup_apply(&f, s, t + u).unwrap();
        for (a, b) in two.iter().zip(&one) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn energy_scaling_random_factor(c in 0.25f64..4.0, seed in 0u64..20) {
        let alpha = 2.5f64;
        let params = EnergyParams::new(alpha, 0.0).unwrap();
        let curve = fourier_perturbed_circle(seed, 0.05, 4, 64).unwrap();
        let e1 = ohara_energy(&geometry(&curve).unwrap(), &params).unwrap();
        let e2 = ohara_energy(&geometry(&curve.scaled(c)).unwrap(), &params).unwrap();
        let rel = (e2 - c.powf(2.0 - alpha) * e1).abs() / e1;
        prop_assert!(rel <= 1e-8, "scaling residual {rel}");
    }

    #[test]
    fn reparameterization_idempotent_random_seed(seed in 0u64..20) {
        let c = fourier_perturbed_circle(seed, 0.05, 5, 64).unwrap();
        let r1 = reparameterize_arclength(&c).unwrap();
        let r2 = reparameterize_arclength(&r1).unwrap();
        let len = geometry(&r1).unwrap().length;
        for (p, q) in r1.points().iter().zip(r2.points()) {
            prop_assert!(vec3::dist(p, q) <= 1e-10 * len);
        }
    }

    #[test]
    fn duhamel_preserves_mean_without_forcing(mean in -2.0f64..2.0, steps in 1usize..12) {
        let n = 32;
        let u0: Vec<f64> = (0..n)
            .map(|j| mean + (2.0 * std::f64::consts::PI * j as f64 / n as f64).sin())
            .collect();
        let traj = knotflow::duhamel_solve(&u0, |_| vec![0.0; n], 1.0, 2.5, 0.3, steps).unwrap();
        let m: f64 = traj.last().unwrap().iter().sum::<f64>() / n as f64;
        prop_assert!((m - mean).abs() <= 1e-13 * mean.abs().max(1.0));
    }
}
