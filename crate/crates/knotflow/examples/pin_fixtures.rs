//! Dev-time generator for the regression fixtures pinned in tests.
fn main() {
    let alpha = 2.5f64;

    // trefoil at high resolution: energy, curvature energies, bi-Lipschitz
    let tref = knotflow::torus_knot(2, 3, 2.0, 1.0, 1024).unwrap();
    let geom = knotflow::geometry(&tref).unwrap();
    let params = knotflow::EnergyParams::new(alpha, 0.0).unwrap();
    println!("trefoil E_alpha(1024)   = {:.12}", knotflow::ohara_energy(&geom, &params).unwrap());
    println!("trefoil length          = {:.12}", geom.length);
    println!("trefoil bilipschitz     = {:.12}", knotflow::bilipschitz_constant(&geom).unwrap());
    for k in 0..3u32 {
        println!("trefoil E^{k}(1024)      = {:.12}", knotflow::higher_energy(&geom, k).unwrap());
    }
    // decomposition piece magnitudes on the arc-length trefoil at N=512
    let ar = knotflow::reparameterize_arclength(&knotflow::torus_knot(2, 3, 2.0, 1.0, 512).unwrap()).unwrap();
    let ag = knotflow::geometry(&ar).unwrap();
    let parts = knotflow::tilde_h(&ag, alpha).unwrap();
    let l2 = |f: &Vec<[f64;3]>| -> f64 {
        let s: f64 = f.iter().zip(&ag.speed).map(|(v, &q)| knotflow::vec3::norm_sq(v) * q).sum();
        (s / ag.n() as f64).sqrt()
    };
    println!("trefoil |Q part|_L2(512) = {:.10}", l2(&parts.q_part));
    println!("trefoil |R1|_L2(512)     = {:.10}", l2(&parts.r1_part));
    println!("trefoil |R2|_L2(512)     = {:.10}", l2(&parts.r2_part));
    // decomposition residual at 512 for margin info
    let h = knotflow::gradient_direct(&ag, alpha).unwrap();
    let mut num = 0.0; let mut den = 0.0;
    for i in 0..ag.n() {
        let t = &ag.tangent[i];
        let p = knotflow::vec3::reject_unit(&parts.total[i], t);
        let d = knotflow::vec3::sub(&p, &h.values[i]);
        num += knotflow::vec3::norm_sq(&d);
        den += knotflow::vec3::norm_sq(&h.values[i]);
    }
    println!("trefoil decomposition rel(512) = {:.3e}", (num / den).sqrt());

    // circle gradient magnitudes for r = 2 (sign probe fixture)
    let g2 = knotflow::geometry(&knotflow::circle(2.0f64, 256).unwrap()).unwrap();
    let h2 = knotflow::gradient_direct(&g2, alpha).unwrap();
    let mag = knotflow::vec3::norm(&h2.values[0]);
    println!("circle r=2 |H|          = {:.12}  (closed form 0.075790744359166)", mag);

    // coercivity stress corpus: 100 perturbed circles, alpha in {2.2, 2.5, 2.8}
    for a in [2.2f64, 2.5, 2.8] {
        let mut worst = 0.0f64;
        for seed in 0..100u64 {
            let amp = 0.02 + 0.06 * ((seed % 10) as f64) / 10.0;
            let band = 3 + (seed % 7) as u32;
            let c = knotflow::fourier_perturbed_circle(seed, amp, band, 128).unwrap();
            let g = knotflow::geometry(&c).unwrap();
            let r = knotflow::coercivity_ratio(&g, a).unwrap();
            if r > worst { worst = r; }
        }
        println!("coercivity corpus max (alpha={a}) = {:.10}", worst);
    }

    // GNS corpus: 1000 random 64-mode fields
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let n = 256;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let f: Vec<f64> = {
            let coef: Vec<(f64, f64)> = (1..=64).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            (0..n).map(|j| {
                let x = j as f64 / n as f64;
                coef.iter().enumerate().map(|(k, &(a, b))| {
                    let w = 2.0 * std::f64::consts::PI * (k + 1) as f64 * x;
                    a * w.cos() + b * w.sin()
                }).sum()
            }).collect()
        };
        let r = knotflow::gns_check(&f, 0.5, 1.2, 2.5).unwrap();
        if r > worst { worst = r; }
    }
    println!("gns corpus max = {:.12}", worst);
}
