//! The `validate` subcommand: recomputes the pinned constants and the core
//! operator identities, prints a pass/fail table, and emits a machine-readable
//! report.

use anyhow::Context;
use knotflow::vec3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Deserialize)]
pub struct PinnedConstants {
    pub m_alpha: BTreeMap<String, f64>,
    pub symbol_limit: BTreeMap<String, f64>,
    pub coercivity_bound: BTreeMap<String, f64>,
    pub gns_bound: f64,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
}

fn check(name: impl Into<String>, measured: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        tolerance,
        measured,
        pass: measured.is_finite() && measured <= tolerance,
    }
}

pub fn run_validation(pinned: &PinnedConstants) -> anyhow::Result<Vec<Check>> {
    let mut checks = Vec::new();

    // pinned unit-circle energies against the quadrature route
    for (key, &expect) in &pinned.m_alpha {
        let alpha: f64 = key.parse().context("alpha key in fixtures")?;
        let got = knotflow::m_alpha(alpha)?;
        checks.push(check(
            format!("m_alpha[{key}] fixture"),
            (got / expect - 1.0).abs(),
            1e-9,
        ));
    }

    // symbol large-mode limits
    for (key, &expect) in &pinned.symbol_limit {
        let alpha: f64 = key.parse()?;
        let k = 512i64;
        let tpk = 2.0 * std::f64::consts::PI * k as f64;
        let ratio = knotflow::q_symbol(k, alpha)? / tpk.powf(alpha + 1.0);
        checks.push(check(
            format!("symbol_limit[{key}] fixture"),
            (ratio / expect - 1.0).abs(),
            1e-3,
        ));
    }

    // symbol asymptotics: deviation slope near -1 at alpha just above 2
    {
        let alpha = 2.1f64;
        let limit = {
            let k = 2048i64;
            let tpk = 2.0 * std::f64::consts::PI * k as f64;
            knotflow::q_symbol(k, alpha)? / tpk.powf(alpha + 1.0)
        };
        let ks = [8i64, 16, 32, 64];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &k in &ks {
            let tpk = 2.0 * std::f64::consts::PI * k as f64;
            let r = knotflow::q_symbol(k, alpha)? / tpk.powf(alpha + 1.0);
            xs.push((k as f64).ln());
            ys.push(((r - limit).abs() / limit).ln());
        }
        let m = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        checks.push(check("symbol asymptotic slope (+1 band 0.2)", (slope + 1.0).abs(), 0.2));
    }

    // heat kernel laws
    {
        let params = knotflow::HeatKernelParams::new(3.5, 1.0)?;
        checks.push(check(
            "heat kernel mass",
            (knotflow::heat_kernel_mass(&params)? - 1.0).abs(),
            1e-8,
        ));
        let s = 2.5;
        let t = 0.5f64;
        let pt = knotflow::HeatKernelParams::new(s, t)?;
        let p1 = knotflow::HeatKernelParams::new(s, 1.0)?;
        let lam = t.powf(-1.0 / s);
        let mut dev = 0.0f64;
        for x in [0.0f64, 0.4, 1.5] {
            dev = dev.max(
                (knotflow::heat_kernel(x, &pt)? - lam * knotflow::heat_kernel(lam * x, &p1)?).abs(),
            );
        }
        checks.push(check("heat kernel scaling identity", dev, 1e-10));
        let p2 = knotflow::HeatKernelParams::new(2.0, 0.7)?;
        let mut gdev = 0.0f64;
        for x in [0.0f64, 0.5, 2.0] {
            let exact =
                (4.0 * std::f64::consts::PI * 0.7).powf(-0.5) * (-x * x / (4.0 * 0.7)).exp();
            gdev = gdev.max((knotflow::heat_kernel(x, &p2)? - exact).abs());
        }
        checks.push(check("heat kernel gaussian (s=2)", gdev, 1e-10));
        let n = 64;
        let f: Vec<f64> = (0..n)
            .map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64).sin())
            .collect();
        let two = knotflow::heat_semigroup_apply(
            &knotflow::heat_semigroup_apply(&f, 2.5, 0.02)?,
            2.5,
            0.03,
        )?;
        let one = knotflow::heat_semigroup_apply(&f, 2.5, 0.05)?;
        let sdev = two
            .iter()
            .zip(&one)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        checks.push(check("heat semigroup law", sdev, 1e-12));
    }

    // gradient against central differences of the energy
    {
        let n = 256;
        let alpha = 2.5f64;
        let curve = knotflow::fourier_perturbed_circle(7, 0.05, 5, n)?;
        let mut worst = 0.0f64;
        for seed in 0..5u64 {
            let dir = direction_field(900 + seed, n);
            worst = worst.max(knotflow::first_variation_check(&curve, &dir, alpha, 1e-5)?);
        }
        checks.push(check("gradient first-variation identity", worst, 1e-4));
    }

    // decomposition identity
    {
        let alpha = 2.5f64;
        let ar = knotflow::reparameterize_arclength(&knotflow::fourier_perturbed_circle(
            7, 0.05, 5, 256,
        )?)?;
        let geom = knotflow::geometry(&ar)?;
        let parts = knotflow::tilde_h(&geom, alpha)?;
        let direct = knotflow::gradient_direct(&geom, alpha)?;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..geom.n() {
            let p = vec3::reject_unit(&parts.total[i], &geom.tangent[i]);
            num += vec3::norm_sq(&vec3::sub(&p, &direct.values[i]));
            den += vec3::norm_sq(&direct.values[i]);
        }
        checks.push(check("quasilinear decomposition identity", (num / den).sqrt(), 1e-3));
    }

    // scaling law (exact homogeneity of the discrete energy)
    {
        let alpha = 2.5f64;
        let params = knotflow::EnergyParams::new(alpha, 0.0)?;
        let c = knotflow::fourier_perturbed_circle(7, 0.05, 5, 128)?;
        let e1 = knotflow::ohara_energy(&knotflow::geometry(&c)?, &params)?;
        let e2 = knotflow::ohara_energy(&knotflow::geometry(&c.scaled(2.0))?, &params)?;
        checks.push(check(
            "energy scaling law",
            (e2 - 2.0f64.powf(2.0 - alpha) * e1).abs() / e1,
            1e-10,
        ));
    }

    // interpolation ratio: single-mode equality and the pinned bound
    {
        let n = 128;
        let f: Vec<f64> = (0..n)
            .map(|j| (2.0 * std::f64::consts::PI * 3.0 * j as f64 / n as f64).sin())
            .collect();
        let r = knotflow::gns_check(&f, 0.5, 1.2, 2.5)?;
        checks.push(check("interpolation single-mode ratio", (r - 1.0).abs(), 1e-12));
        checks.push(check(
            "interpolation ratio within pinned bound",
            (r - pinned.gns_bound).max(0.0),
            1e-12,
        ));
    }

    Ok(checks)
}

fn direction_field(seed: u64, n: usize) -> Vec<[f64; 3]> {
    use knotflow::Real;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut field = vec![[0.0f64; 3]; n];
    for k in 0..=5u32 {
        let mut amp = [[0.0f64; 2]; 2];
        for a in amp.iter_mut() {
            a[0] = rng.gen_range(-1.0..1.0);
            a[1] = rng.gen_range(-1.0..1.0);
        }
        for (j, f) in field.iter_mut().enumerate() {
            let x = 2.0 * std::f64::consts::PI * k as f64 * j as f64 / n as f64;
            for c in 0..2 {
                f[c] += f64::lit(amp[c][0] * x.cos() + amp[c][1] * x.sin());
            }
        }
    }
    field
}

pub fn print_table(checks: &[Check]) {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(10);
    println!("{:<width$}  {:>12}  {:>12}  result", "check", "measured", "tolerance");
    for c in checks {
        println!(
            "{:<width$}  {:>12.3e}  {:>12.3e}  {}",
            c.name,
            c.measured,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
}
