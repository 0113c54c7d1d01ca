//! The self-repulsion energy, the length-penalized objective, and the
//! closed-form consequences used by the flow (critical circle radius, length
//! lower bound).
//!
//! The double integral is evaluated against the chord of a comparison circle
//! of the same length: with `C_L(d) = (L/pi) sin(pi d / L)`,
//!
//! `E(gamma) = sum over pairs [chord^-alpha - C_L(d)^-alpha] + L^{2-alpha} m`,
//!
//! where `m` is the energy of the unit-length circle. The regrouping is an
//! identity (the subtracted term integrates to `L^{2-alpha} m` exactly), makes
//! round circles spectrally exact, and removes the derivative kink the raw
//! intrinsic distance has at antipodal points. The remaining near-diagonal
//! singularity `~ |w|^{2-alpha}` is handled by a two-term endpoint correction.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;

use crate::curve::Geometry;
use crate::error::{Error, Result};
use crate::quad::{
    band_coefficients, gauss_legendre, navot_factor, pairwise_sum, BAND_EXTRACTION_OFFSET,
};
use crate::real::Real;
use crate::vec3;

/// Parameters of the energy `E^alpha + lambda L`.
#[derive(Debug, Clone, Copy)]
pub struct EnergyParams<R> {
    /// Repulsion exponent, strictly inside `(2, 3)`.
    pub alpha: R,
    /// Length penalty, nonnegative.
    pub lambda: R,
    /// Half-width (in samples) of the excluded near-diagonal band.
    pub exclusion: usize,
    /// Apply the analytic band correction (disable only to observe the
    /// first-order stall of the naive quadrature).
    pub local_correction: bool,
}

impl<R: Real> EnergyParams<R> {
    pub fn new(alpha: R, lambda: R) -> Result<Self> {
        let a = alpha.as_f64();
        if !(a > 2.0 && a < 3.0) {
            return Err(Error::invalid(format!("alpha must lie in (2, 3), got {a}")));
        }
        if !(lambda >= R::zero() && lambda.is_finite()) {
            return Err(Error::invalid("lambda must be finite and nonnegative"));
        }
        Ok(EnergyParams {
            alpha,
            lambda,
            exclusion: 2,
            local_correction: true,
        })
    }
}

/// Energy of the unit-length circle, computed once per `alpha` by quadrature
/// of the one-dimensional reduction
/// `m = 2 pi^{alpha-1} int_0^{pi/2} (sin^{-alpha} u - u^{-alpha}) du`
/// and cached. The Richardson check guards the panel rule.
pub fn m_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 2.0 && alpha < 3.0) {
        return Err(Error::invalid(format!("alpha must lie in (2, 3), got {alpha}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&alpha.to_bits()) {
        return Ok(v);
    }
    let coarse = m_alpha_raw(alpha, 1);
    let fine = m_alpha_raw(alpha, 2);
    let rel = (coarse - fine).abs() / fine.abs();
    if rel > 1e-12 {
        return Err(Error::NonConvergence {
            what: "unit-circle energy quadrature",
            estimate: rel,
            tolerance: 1e-12,
        });
    }
    cache.lock().unwrap().insert(alpha.to_bits(), fine);
    Ok(fine)
}

fn m_alpha_raw(alpha: f64, refine: u32) -> f64 {
    // Head by series of (u/sin u)^alpha - 1 = c2 u^2 + c4 u^4 + c6 u^6 + ...
    let eps: f64 = 0.02;
    let c2 = alpha / 6.0;
    let c4 = alpha * (5.0 * alpha + 2.0) / 360.0;
    let c6 = alpha * (35.0 * alpha * alpha + 42.0 * alpha + 16.0) / 45360.0;
    let head = c2 * eps.powf(3.0 - alpha) / (3.0 - alpha)
        + c4 * eps.powf(5.0 - alpha) / (5.0 - alpha)
        + c6 * eps.powf(7.0 - alpha) / (7.0 - alpha);
    let (nodes, weights) = gauss_legendre(12);
    let mut total = head;
    let mut lo = eps;
    let top = std::f64::consts::FRAC_PI_2;
    while lo < top {
        let wid = (top - lo).min(lo * 0.6 / refine as f64);
        let hi = lo + wid;
        let (xm, xr) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let u: f64 = xm + xr * x;
            acc += w * (u.sin().powf(-alpha) - u.powf(-alpha));
        }
        total += xr * acc;
        lo = hi;
    }
    2.0 * std::f64::consts::PI.powf(alpha - 1.0) * total
}

/// The self-repulsion energy of a curve.
pub fn ohara_energy<R: Real>(geom: &Geometry<R>, params: &EnergyParams<R>) -> Result<R> {
    let alpha = params.alpha.as_f64();
    let n = geom.n();
    let excl = params.exclusion;
    if 2 * excl + 1 >= n {
        return Err(Error::invalid("exclusion band covers the whole grid"));
    }
    let length = geom.length;
    let m = R::lit(m_alpha(alpha)?);
    let pts = &geom.centered;
    let speed = &geom.speed;
    let h = R::lit(1.0 / n as f64);
    let pi = R::PI();
    let a = params.alpha;

    let chord_limit = R::lit(crate::curve::EMBEDDEDNESS_CHORD_LIMIT) * length;
    let arc_guard = R::lit(0.05) * length;

    let rows: Vec<std::result::Result<(R, bool), Error>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut terms = Vec::with_capacity(n - 2 * excl - 1);
            let mut close = false;
            for j in 0..n {
                let gap = (j + n - i) % n;
                if gap <= excl || gap >= n - excl {
                    continue;
                }
                let chord = vec3::dist(&pts[i], &pts[j]);
                let d = geom.intrinsic_distance_idx(i, j);
                if chord < chord_limit && d > arc_guard {
                    return Err(Error::Embeddedness {
                        chord: chord.as_f64(),
                        arc: d.as_f64(),
                        limit: chord_limit.as_f64(),
                    });
                }
                if chord < R::lit(0.01) * d {
                    close = true;
                }
                let cl = (length / pi) * (pi * d / length).sin();
                terms.push((chord.powf(-a) - cl.powf(-a)) * speed[j]);
            }
            Ok((pairwise_sum(&terms) * speed[i], close))
        })
        .collect();
    let mut row_vals = Vec::with_capacity(n);
    let mut near_collision = false;
    for r in rows {
        let (v, close) = r?;
        row_vals.push(v);
        near_collision |= close;
    }
    if near_collision {
        log::warn!("energy evaluated near self-intersection; value is large but finite");
    }
    let mut total = pairwise_sum(&row_vals) * h * h;

    if params.local_correction {
        let s_lead = navot_factor(2.0 - alpha, n, excl);
        let s_next = navot_factor(4.0 - alpha, n, excl);
        let w0 = BAND_EXTRACTION_OFFSET;
        let corrections: Vec<R> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = i as f64 / n as f64;
                let row = |w: f64| -> R {
                    let mut acc = R::zero();
                    for sgn in [1.0, -1.0] {
                        let ev = geom.eval_at(R::lit(x + sgn * w));
                        let chord = vec3::dist(&ev.gamma_centered, &pts[i]);
                        let raw = (ev.arc - geom.arc[i]).abs();
                        let md = raw - (raw / length).floor() * length;
                        let d = md.min(length - md);
                        let cl = (length / pi) * (pi * d / length).sin();
                        acc += (chord.powf(-a) - cl.powf(-a)) * ev.speed;
                    }
                    acc * R::lit(0.5) * speed[i]
                };
                let g1 = row(w0) * R::lit(w0.powf(alpha - 2.0));
                let g2 = row(w0 / 2.0) * R::lit((w0 / 2.0).powf(alpha - 2.0));
                let g3 = row(w0 / 4.0) * R::lit((w0 / 4.0).powf(alpha - 2.0));
                let (c, dcoef) = band_coefficients(g1, g2, g3, R::lit(w0));
                c * R::lit(s_lead) + dcoef * R::lit(s_next)
            })
            .collect();
        total += pairwise_sum(&corrections) * h;
    }

    Ok(total + length.powf(R::lit(2.0) - a) * m)
}

/// `E^alpha + lambda L`.
pub fn total_energy<R: Real>(geom: &Geometry<R>, params: &EnergyParams<R>) -> Result<R> {
    Ok(ohara_energy(geom, params)? + params.lambda * geom.length)
}

/// Radius of the round circle minimizing `E^alpha + lambda L`:
/// `r* = [ (alpha - 2) (2 pi)^{1 - alpha} m_alpha / lambda ]^{1/(alpha-1)}`.
pub fn critical_circle_radius<R: Real>(params: &EnergyParams<R>) -> Result<R> {
    let alpha = params.alpha.as_f64();
    let lambda = params.lambda.as_f64();
    if !(lambda > 0.0) {
        return Err(Error::invalid("critical radius requires lambda > 0"));
    }
    let m = m_alpha(alpha)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = ((alpha - 2.0) * two_pi.powf(1.0 - alpha) * m / lambda).powf(1.0 / (alpha - 1.0));
    Ok(R::lit(r))
}

/// Uniform-in-time length lower bound `(m_alpha / E0)^{1/(alpha-2)}` implied
/// by energy monotonicity and the scaling of the energy.
pub fn length_lower_bound<R: Real>(params: &EnergyParams<R>, e0: R) -> Result<R> {
    let alpha = params.alpha.as_f64();
    let m = m_alpha(alpha)?;
    if e0.as_f64() < m {
        return Err(Error::invalid(format!(
            "initial energy {:.6} below the unit-circle energy {:.6}; evaluation inconsistent",
            e0.as_f64(),
            m
        )));
    }
    Ok(R::lit((m / e0.as_f64()).powf(1.0 / (alpha - 2.0))))
}
