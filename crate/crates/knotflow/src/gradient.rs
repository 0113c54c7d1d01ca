//! The L^2 gradient of the self-repulsion energy, its quasilinear
//! decompositions, the flow velocity, and a finite-difference check of the
//! first-variation identity.
//!
//! `gradient_direct` integrates, for each sample `x`,
//!
//! `p.v. int P_perp { 2 alpha (gamma(x+w) - gamma(x)) / chord^{alpha+2}
//!   - (alpha - 2) kappa(x) / d^alpha - 2 kappa(x) / chord^alpha } |gamma'(x+w)| dw`.
//!
//! As in the energy, the intrinsic-distance power is evaluated against the
//! comparison circle `C_L(d)` and compensated exactly by
//! `(alpha - 2) L^{1-alpha} m_alpha kappa(x)`; the odd singular part cancels
//! in the symmetric grid sum and the even `|w|^{2-alpha}` remainder is
//! corrected through the same two-term endpoint factors as the energy.

use rayon::prelude::*;

use crate::curve::{ClosedCurve, Geometry};
use crate::energy::{m_alpha, ohara_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::fractional::apply_q_points;
use crate::quad::{
    band_coefficients, navot_factor, pairwise_sum, BAND_EXTRACTION_OFFSET,
};
use crate::real::Real;
use crate::vec3::{self, V3};

/// How a gradient field was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMethod {
    /// Direct singular-integral quadrature.
    Direct,
    /// Leading spectral term or the residual of the quasilinear split.
    Split,
}

/// A vector field along the curve samples, normal-valued by construction.
#[derive(Debug, Clone)]
pub struct GradientField<R> {
    pub values: Vec<V3<R>>,
    pub alpha: R,
    pub method: GradientMethod,
}

impl<R: Real> GradientField<R> {
    /// `L^2(|gamma'| dx)` norm of the field.
    pub fn l2_norm(&self, geom: &Geometry<R>) -> R {
        let n = geom.n();
        let terms: Vec<R> = self
            .values
            .iter()
            .zip(&geom.speed)
            .map(|(v, &q)| vec3::norm_sq(v) * q)
            .collect();
        (pairwise_sum(&terms) / R::lit(n as f64)).sqrt()
    }

    /// Largest tangential component relative to the field norm.
    pub fn tangential_fraction(&self, geom: &Geometry<R>) -> R {
        let mut worst = R::zero();
        let scale = self
            .values
            .iter()
            .map(vec3::norm)
            .fold(R::zero(), R::max)
            .max(R::lit(f64::MIN_POSITIVE));
        for (v, t) in self.values.iter().zip(&geom.tangent) {
            worst = worst.max(vec3::dot(v, t).abs());
        }
        worst / scale
    }
}

/// The three decomposition pieces of the unprojected gradient, plus their sum.
///
/// On arc-length curves the gradient integrand regroups as
/// `alpha Q gamma - 2 R1 + 2 alpha R2` with `R1` the curvature-weighted
/// difference of inverse chord/arc powers and `R2` the Taylor-remainder
/// weighted difference at exponent `alpha + 2`.
#[derive(Debug, Clone)]
pub struct TildeParts<R> {
    pub total: Vec<V3<R>>,
    pub q_part: Vec<V3<R>>,
    pub r1_part: Vec<V3<R>>,
    pub r2_part: Vec<V3<R>>,
}

struct RowGeometry<'a, R: Real> {
    geom: &'a Geometry<R>,
    alpha: R,
    chord_limit: R,
    arc_guard: R,
}

impl<'a, R: Real> RowGeometry<'a, R> {
    fn intrinsic(&self, raw_gap: R) -> R {
        let length = self.geom.length;
        let md = raw_gap.abs();
        let md = md - (md / length).floor() * length;
        md.min(length - md)
    }

    /// Comparison-circle chord at intrinsic distance `d`.
    fn comparison_chord(&self, d: R) -> R {
        let length = self.geom.length;
        (length / R::PI()) * (R::PI() * d / length).sin()
    }

    /// Integrand of the direct gradient at sample `i`, offset `w` (off-grid).
    fn direct_integrand_at(&self, i: usize, x: R) -> Result<V3<R>> {
        let ev = self.geom.eval_at(x);
        let dg = vec3::sub(&ev.gamma_centered, &self.geom.centered[i]);
        let chord = vec3::norm(&dg);
        let d = self.intrinsic(ev.arc - self.geom.arc[i]);
        self.direct_kernel(i, &dg, chord, d, ev.speed)
    }

    fn direct_kernel(&self, i: usize, dg: &V3<R>, chord: R, d: R, weight: R) -> Result<V3<R>> {
        if chord < self.chord_limit && d > self.arc_guard {
            return Err(Error::Embeddedness {
                chord: chord.as_f64(),
                arc: d.as_f64(),
                limit: self.chord_limit.as_f64(),
            });
        }
        let a = self.alpha;
        let two = R::lit(2.0);
        let cl = self.comparison_chord(d);
        let kap = &self.geom.curvature[i];
        let mut out = vec3::scale(dg, two * a * chord.powf(-(two + a)));
        vec3::axpy(&mut out, -(a - two) * cl.powf(-a) - two * chord.powf(-a), kap);
        Ok(vec3::scale(&out, weight))
    }
}

/// Direct quadrature of the gradient, projected onto the normal bundle.
///
/// Valid for any regular parameterization (the integrand is written with the
/// true intrinsic distance); accuracy constants are best near arc length,
/// which the flow maintains.
pub fn gradient_direct<R: Real>(geom: &Geometry<R>, alpha: R) -> Result<GradientField<R>> {
    let a = alpha.as_f64();
    let m = R::lit(m_alpha(a)?);
    let n = geom.n();
    let excl = 2usize;
    let h = R::lit(1.0 / n as f64);
    let length = geom.length;
    let pts = &geom.centered;
    let row_geom = RowGeometry {
        geom,
        alpha,
        chord_limit: R::lit(crate::curve::EMBEDDEDNESS_CHORD_LIMIT) * length,
        arc_guard: R::lit(0.05) * length,
    };

    let s_lead = R::lit(navot_factor(2.0 - a, n, excl));
    let s_next = R::lit(navot_factor(4.0 - a, n, excl));
    let w0 = BAND_EXTRACTION_OFFSET;

    let rows: Vec<Result<V3<R>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            // grid part
            let mut tx = Vec::with_capacity(n);
            let mut ty = Vec::with_capacity(n);
            let mut tz = Vec::with_capacity(n);
            for j in 0..n {
                let gap = (j + n - i) % n;
                if gap <= excl || gap >= n - excl {
                    continue;
                }
                let dg = vec3::sub(&pts[j], &pts[i]);
                let chord = vec3::norm(&dg);
                let d = geom.intrinsic_distance_idx(i, j);
                let v = row_geom.direct_kernel(i, &dg, chord, d, geom.speed[j])?;
                tx.push(v[0]);
                ty.push(v[1]);
                tz.push(v[2]);
            }
            let mut hi = [
                pairwise_sum(&tx) * h,
                pairwise_sum(&ty) * h,
                pairwise_sum(&tz) * h,
            ];
            // exact compensation of the comparison-circle substitution
            let comp = (alpha - R::lit(2.0))
                * length.powf(R::one() - alpha)
                * m;
            vec3::axpy(&mut hi, comp, &geom.curvature[i]);
            // band correction
            let x = R::lit(i as f64 / n as f64);
            let row_even = |w: f64| -> Result<V3<R>> {
                let p = row_geom.direct_integrand_at(i, x + R::lit(w))?;
                let q = row_geom.direct_integrand_at(i, x - R::lit(w))?;
                Ok(vec3::scale(&vec3::add(&p, &q), R::lit(0.5)))
            };
            let g1 = row_even(w0)?;
            let g2 = row_even(w0 / 2.0)?;
            let g3 = row_even(w0 / 4.0)?;
            for c in 0..3 {
                let f1 = g1[c] * R::lit(w0.powf(a - 2.0));
                let f2 = g2[c] * R::lit((w0 / 2.0).powf(a - 2.0));
                let f3 = g3[c] * R::lit((w0 / 4.0).powf(a - 2.0));
                let (cc, dd) = band_coefficients(f1, f2, f3, R::lit(w0));
                hi[c] += cc * s_lead + dd * s_next;
            }
            // project onto the normal bundle
            Ok(vec3::reject_unit(&hi, &geom.tangent[i]))
        })
        .collect();

    let mut values = Vec::with_capacity(n);
    for r in rows {
        values.push(r?);
    }
    Ok(GradientField {
        values,
        alpha,
        method: GradientMethod::Direct,
    })
}

/// Maximum relative speed deviation accepted by the arc-length-only operators.
const ARCLENGTH_TOLERANCE: f64 = 1e-5;

/// The unprojected gradient through its spectral-plus-remainder regrouping,
/// with the three pieces reported separately. Requires a curve maintained at
/// (near) constant speed.
pub fn tilde_h<R: Real>(geom: &Geometry<R>, alpha: R) -> Result<TildeParts<R>> {
    if geom.speed_deviation().as_f64() > ARCLENGTH_TOLERANCE {
        return Err(Error::invalid(format!(
            "decomposition requires an arc-length parameterization \
             (speed deviation {:.2e}); reparameterize first",
            geom.speed_deviation().as_f64()
        )));
    }
    let a = alpha.as_f64();
    let n = geom.n();
    let dim = geom.dim();
    let excl = 2usize;
    let h = R::lit(1.0 / n as f64);
    let length = geom.length;
    let pts = &geom.centered;
    let two = R::lit(2.0);

    // Spectral leading part: alpha L^{-(alpha+1)} Q gamma.
    let qg = apply_q_points(pts, dim, a)?;
    let qscale = alpha * length.powf(-(alpha + R::one()));
    let q_part: Vec<V3<R>> = qg.iter().map(|v| vec3::scale(v, qscale)).collect();

    let s_lead = R::lit(navot_factor(2.0 - a, n, excl));
    let s_next = R::lit(navot_factor(4.0 - a, n, excl));
    let w0 = BAND_EXTRACTION_OFFSET;

    // R1 and R2 rows.
    let rows: Vec<(V3<R>, V3<R>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let kap = geom.curvature[i];
            let gp = geom.derivative[i];
            let mut r1x = Vec::with_capacity(n);
            let mut r1y = Vec::with_capacity(n);
            let mut r1z = Vec::with_capacity(n);
            let mut r2 = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
            for j in 0..n {
                let gap = (j + n - i) % n;
                if gap <= excl || gap >= n - excl {
                    continue;
                }
                // signed offset in (-1/2, 1/2]
                let w = R::lit(if gap <= n / 2 {
                    gap as f64 / n as f64
                } else {
                    gap as f64 / n as f64 - 1.0
                });
                let dg = vec3::sub(&pts[j], &pts[i]);
                let chord = vec3::norm(&dg);
                let aw = length * w.abs();
                let alpha_r = alpha;
                let f1 = (chord.powf(-alpha_r) - aw.powf(-alpha_r)) * geom.speed[j];
                r1x.push(kap[0] * f1);
                r1y.push(kap[1] * f1);
                r1z.push(kap[2] * f1);
                // the w = 1/2 endpoint has no mirror sample; its trapezoid
                // weight carries the even average, in which the w gamma' term
                // cancels
                let rest = if gap == n / 2 {
                    dg
                } else {
                    vec3::sub(&dg, &vec3::scale(&gp, w))
                };
                let f2 = (chord.powf(-(alpha_r + two)) - aw.powf(-(alpha_r + two)))
                    * geom.speed[j];
                for c in 0..3 {
                    r2[c].push(rest[c] * f2);
                }
            }
            let mut r1v = [
                pairwise_sum(&r1x) * h,
                pairwise_sum(&r1y) * h,
                pairwise_sum(&r1z) * h,
            ];
            let mut r2v = [
                pairwise_sum(&r2[0]) * h,
                pairwise_sum(&r2[1]) * h,
                pairwise_sum(&r2[2]) * h,
            ];
            // band corrections by three-point extraction on interpolated rows
            let x = i as f64 / n as f64;
            let row1 = |w: f64| -> V3<R> {
                let mut acc = vec3::zero();
                for sgn in [1.0, -1.0] {
                    let ev = geom.eval_at(R::lit(x + sgn * w));
                    let chord = vec3::dist(&ev.gamma_centered, &pts[i]);
                    let aw = length * R::lit(w);
                    let f = (chord.powf(-alpha) - aw.powf(-alpha)) * ev.speed;
                    vec3::axpy(&mut acc, f, &kap);
                }
                vec3::scale(&acc, R::lit(0.5))
            };
            let row2 = |w: f64| -> V3<R> {
                let mut acc = vec3::zero();
                for sgn in [1.0, -1.0] {
                    let ev = geom.eval_at(R::lit(x + sgn * w));
                    let dg = vec3::sub(&ev.gamma_centered, &pts[i]);
                    let rest = vec3::sub(&dg, &vec3::scale(&gp, R::lit(sgn * w)));
                    let chord = vec3::norm(&dg);
                    let aw = length * R::lit(w);
                    let f = (chord.powf(-(alpha + two)) - aw.powf(-(alpha + two))) * ev.speed;
                    vec3::axpy(&mut acc, f, &rest);
                }
                vec3::scale(&acc, R::lit(0.5))
            };
            for (rowf, out) in [(&row1 as &dyn Fn(f64) -> V3<R>, &mut r1v), (&row2, &mut r2v)] {
                let g1 = rowf(w0);
                let g2 = rowf(w0 / 2.0);
                let g3 = rowf(w0 / 4.0);
                for c in 0..3 {
                    let f1 = g1[c] * R::lit(w0.powf(a - 2.0));
                    let f2 = g2[c] * R::lit((w0 / 2.0).powf(a - 2.0));
                    let f3 = g3[c] * R::lit((w0 / 4.0).powf(a - 2.0));
                    let (cc, dd) = band_coefficients(f1, f2, f3, R::lit(w0));
                    out[c] += cc * s_lead + dd * s_next;
                }
            }
            (r1v, r2v)
        })
        .collect();

    let mut total = Vec::with_capacity(n);
    let mut r1_part = Vec::with_capacity(n);
    let mut r2_part = Vec::with_capacity(n);
    for (i, (r1, r2)) in rows.into_iter().enumerate() {
        let mut t = q_part[i];
        vec3::axpy(&mut t, -two, &r1);
        vec3::axpy(&mut t, two * alpha, &r2);
        total.push(t);
        r1_part.push(r1);
        r2_part.push(r2);
    }
    Ok(TildeParts {
        total,
        q_part,
        r1_part,
        r2_part,
    })
}

/// Split the gradient into the stiff spectral leading term and the smooth
/// remainder: `H = (alpha / |gamma'|^{alpha+1}) P_perp(Q gamma) + F`.
///
/// The remainder is the exact residual against [`gradient_direct`], so the
/// two pieces always sum back to it bit-for-bit.
pub fn quasilinear_split<R: Real>(
    geom: &Geometry<R>,
    alpha: R,
) -> Result<(GradientField<R>, GradientField<R>)> {
    let direct = gradient_direct(geom, alpha)?;
    let qg = apply_q_points(&geom.centered, geom.dim(), alpha.as_f64())?;
    let leading: Vec<V3<R>> = (0..geom.n())
        .map(|i| {
            let scale = alpha * geom.speed[i].powf(-(alpha + R::one()));
            let projected = vec3::reject_unit(&qg[i], &geom.tangent[i]);
            vec3::scale(&projected, scale)
        })
        .collect();
    let remainder: Vec<V3<R>> = direct
        .values
        .iter()
        .zip(&leading)
        .map(|(d, l)| vec3::sub(d, l))
        .collect();
    Ok((
        GradientField {
            values: leading,
            alpha,
            method: GradientMethod::Split,
        },
        GradientField {
            values: remainder,
            alpha,
            method: GradientMethod::Split,
        },
    ))
}

/// Flow velocity `V = -H + lambda kappa`.
pub fn flow_velocity<R: Real>(
    geom: &Geometry<R>,
    params: &EnergyParams<R>,
) -> Result<GradientField<R>> {
    let grad = gradient_direct(geom, params.alpha)?;
    let values = grad
        .values
        .iter()
        .zip(&geom.curvature)
        .map(|(hv, k)| {
            let mut v = vec3::scale(hv, -R::one());
            vec3::axpy(&mut v, params.lambda, k);
            v
        })
        .collect();
    Ok(GradientField {
        values,
        alpha: params.alpha,
        method: GradientMethod::Direct,
    })
}

/// Compare the central difference of the energy along `direction` with the
/// quadrature pairing `int <H, h> |gamma'| dx`.
///
/// Returns the mismatch relative to `|H|_{L^2} |h|_{L^2}`, the natural scale
/// (directions with vanishing derivative - tangential fields, translations -
/// would make a ratio to the pairing itself meaningless). Tries `eps`, then
/// `10 eps` and `eps / 10`, and reports the smallest mismatch.
pub fn first_variation_check<R: Real>(
    curve: &ClosedCurve<R>,
    direction: &[V3<R>],
    alpha: R,
    eps: R,
) -> Result<R> {
    if direction.len() != curve.n() {
        return Err(Error::invalid("direction field length mismatch"));
    }
    let geom = crate::curve::geometry(curve)?;
    let params = EnergyParams::new(alpha, R::zero())?;
    let grad = gradient_direct(&geom, alpha)?;
    let n = curve.n();
    let hgrid = R::lit(1.0 / n as f64);

    let pair_terms: Vec<R> = grad
        .values
        .iter()
        .zip(direction)
        .zip(&geom.speed)
        .map(|((g, d), &q)| vec3::dot(g, d) * q)
        .collect();
    let pairing = pairwise_sum(&pair_terms) * hgrid;

    let dir_norm_terms: Vec<R> = direction
        .iter()
        .zip(&geom.speed)
        .map(|(d, &q)| vec3::norm_sq(d) * q)
        .collect();
    let scale = grad.l2_norm(&geom) * (pairwise_sum(&dir_norm_terms) * hgrid).sqrt();
    let scale = scale.max(R::lit(f64::MIN_POSITIVE));

    let mut best = R::infinity();
    for factor in [1.0, 10.0, 0.1] {
        let e = eps * R::lit(factor);
        let shift = |sign: R| -> Result<R> {
            let pts: Vec<V3<R>> = curve
                .points()
                .iter()
                .zip(direction)
                .map(|(p, d)| {
                    let mut out = *p;
                    vec3::axpy(&mut out, sign * e, d);
                    out
                })
                .collect();
            let c = ClosedCurve::new(pts, curve.dim())?;
            ohara_energy(&crate::curve::geometry(&c)?, &params)
        };
        let fd = (shift(R::one())? - shift(-R::one())?) / (R::lit(2.0) * e);
        best = best.min((fd - pairing).abs() / scale);
    }
    Ok(best)
}
