//! Run-time checks mirroring what the theory guarantees about the flow:
//! higher-order curvature energies, the coercivity ratio, the dissipation
//! identity, an empirical Lojasiewicz exponent, and the p = 2
//! Gagliardo-Nirenberg interpolation ratio.

use crate::curve::{geometry, reparameterize_arclength, Geometry};
use crate::energy::{ohara_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::fractional::{gagliardo_seminorm, sobolev_seminorm};
use crate::quad::pairwise_sum;
use crate::real::Real;
use crate::spectral;
use crate::vec3::{self, V3};

/// Per-step scalars recorded along a flow run.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRecord<R> {
    pub step: usize,
    pub t: R,
    pub dt: R,
    pub e_alpha: R,
    pub length: R,
    pub e_total: R,
    /// `|V|_{L^2(|gamma'| dx)}`.
    pub residual: R,
    /// Curvature energies `int |d_s^k kappa|^2 ds` for `k = 0, 1, 2`.
    pub e0: R,
    pub e1: R,
    pub e2: R,
    pub coercivity_ratio: R,
    pub bilipschitz: R,
    /// `|dE/dt + |V|^2|` against the previous accepted step (0 on the first).
    pub dissipation_residual: R,
    pub min_speed: R,
}

impl<R: Real> DiagnosticsRecord<R> {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.dt,
            self.e_alpha,
            self.length,
            self.e_total,
            self.residual,
            self.e0,
            self.e1,
            self.e2,
            self.coercivity_ratio,
            self.bilipschitz,
            self.dissipation_residual,
            self.min_speed,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Curvature energy `int |d_s^k kappa|^2 |gamma'| dx`, with the arc-length
/// derivative realized as repeated spectral differentiation divided by the
/// speed.
pub fn higher_energy<R: Real>(geom: &Geometry<R>, k: u32) -> Result<R> {
    if k > 4 {
        return Err(Error::invalid("curvature-derivative order capped at 4"));
    }
    let n = geom.n();
    let mut field: Vec<V3<R>> = geom.curvature.clone();
    for _ in 0..k {
        let d = spectral::differentiate_points(&field, geom.dim(), 1)?;
        field = d
            .iter()
            .zip(&geom.speed)
            .map(|(v, &q)| vec3::scale(v, R::one() / q))
            .collect();
    }
    let terms: Vec<R> = field
        .iter()
        .zip(&geom.speed)
        .map(|(v, &q)| vec3::norm_sq(v) * q)
        .collect();
    Ok(pairwise_sum(&terms) / R::lit(n as f64))
}

/// Ratio of the squared tangent seminorm `|gamma'|^2_{W^{(alpha-1)/2, 2}}`
/// (Gagliardo form on the circle of circumference `L`) to the energy.
///
/// Scale-invariant; reparameterizes internally when the input is not yet at
/// constant speed.
pub fn coercivity_ratio<R: Real>(geom: &Geometry<R>, alpha: R) -> Result<R> {
    let owned;
    let g = if geom.speed_deviation().as_f64() > 1e-6 {
        owned = geometry(&reparameterize_arclength(geom.curve())?)?;
        &owned
    } else {
        geom
    };
    let a = alpha.as_f64();
    let s = (a - 1.0) / 2.0;
    let semi = gagliardo_seminorm(&g.tangent, g.dim(), s, 2.0, g.length.as_f64())?;
    let params = EnergyParams::new(alpha, R::zero())?;
    let e = ohara_energy(g, &params)?;
    Ok(semi * semi / e)
}

/// Per-step dissipation residual `|dE/dt + |V_prev|^2|` along a recorded
/// series (times, total energies, residual norms). First entry is zero.
pub fn dissipation_residual<R: Real>(t: &[R], e_total: &[R], residual: &[R]) -> Vec<R> {
    let mut out = vec![R::zero(); t.len()];
    for i in 1..t.len() {
        let dt = t[i] - t[i - 1];
        if dt > R::zero() {
            let de = (e_total[i] - e_total[i - 1]) / dt;
            out[i] = (de + residual[i - 1] * residual[i - 1]).abs();
        }
    }
    out
}

/// Result of the Lojasiewicz tail fit.
#[derive(Debug, Clone, Copy)]
pub struct LojasiewiczFit<R> {
    /// Exponent estimate from `slope = 1 - theta`.
    pub theta: R,
    /// Coefficient of determination of the log-log fit.
    pub r_squared: R,
    /// Number of tail samples used.
    pub samples: usize,
}

/// Fit `log |V|` against `log |E - E_inf|` over the tail of a run that
/// terminated near a critical point; `E_inf` is the final recorded energy.
///
/// Descriptive only: the exponent is a least-squares estimate, not a
/// certified constant.
pub fn lojasiewicz_monitor<R: Real>(
    t: &[R],
    e_total: &[R],
    residual: &[R],
) -> Result<LojasiewiczFit<R>> {
    let n = t.len();
    if n < 25 {
        return Err(Error::InsufficientTail { have: n, need: 25 });
    }
    let e_inf = e_total[n - 1];
    // tail = second half, excluding the last few samples; gaps are trusted
    // down to three decades below the tail head (below that, subtracting the
    // final energy distorts them) and never below rounding scale
    let start = n / 2;
    let stop = n - (n / 50).max(2);
    let head_gap = e_total[start] - e_inf;
    let floor = (R::lit(1e-3) * head_gap)
        .max(R::lit(100.0 * f64::EPSILON) * e_inf.abs().max(R::one()));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in start..stop {
        let gap = e_total[i] - e_inf;
        if gap > floor && residual[i] > R::zero() {
            xs.push(gap.ln());
            ys.push(residual[i].ln());
        }
    }
    if xs.len() < 20 {
        return Err(Error::InsufficientTail {
            have: xs.len(),
            need: 20,
        });
    }
    let m = R::lit(xs.len() as f64);
    let sx = pairwise_sum(&xs);
    let sy = pairwise_sum(&ys);
    let sxx: Vec<R> = xs.iter().map(|&x| x * x).collect();
    let sxy: Vec<R> = xs.iter().zip(&ys).map(|(&x, &y)| x * y).collect();
    let sxx = pairwise_sum(&sxx);
    let sxy = pairwise_sum(&sxy);
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    let mut ss_res = R::zero();
    let mut ss_tot = R::zero();
    let mean_y = sy / m;
    for (&x, &y) in xs.iter().zip(&ys) {
        let fit = slope * x + intercept;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot > R::zero() {
        R::one() - ss_res / ss_tot
    } else {
        R::zero()
    };
    Ok(LojasiewiczFit {
        theta: R::one() - slope,
        r_squared,
        samples: xs.len(),
    })
}

/// Interpolation ratio `|f|_{s2} / (|f|_{s3}^theta |f|_{s1}^{1-theta})` with
/// `theta = (s2 - s1)/(s3 - s1)`, on Fourier seminorms. By Hoelder the ratio
/// is at most 1, with equality on single modes.
pub fn gns_check<R: Real>(f: &[R], s1: f64, s2: f64, s3: f64) -> Result<R> {
    if !(s1 <= s2 && s2 <= s3 && s1 < s3) {
        return Err(Error::invalid("need s1 <= s2 <= s3 with s1 < s3"));
    }
    let theta = (s2 - s1) / (s3 - s1);
    let n2 = sobolev_seminorm(f, s2)?;
    let n3 = sobolev_seminorm(f, s3)?;
    let n1 = sobolev_seminorm(f, s1)?;
    let denom = n3.powf(R::lit(theta)) * n1.powf(R::lit(1.0 - theta));
    if denom == R::zero() {
        return Err(Error::invalid("field has no oscillatory content"));
    }
    Ok(n2 / denom)
}
