//! Closed curves sampled uniformly on the unit parameter circle, their
//! differential geometry, and gauge utilities (arc-length reparameterization,
//! bi-Lipschitz constant, intrinsic distance).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad::pairwise_sum;
use crate::real::Real;
use crate::spectral::{self, Phases, TrigSeries};
use crate::vec3::{self, V3};

/// Ratio `min |gamma'| / max |gamma'|` below which a curve counts as degenerate.
pub const REGULARITY_THRESHOLD: f64 = 1e-12;

/// Chord-to-length ratio below which two far-apart samples count as a
/// self-intersection (`arc > 0.05 L` required, so near-diagonal pairs are exempt).
pub const EMBEDDEDNESS_CHORD_LIMIT: f64 = 1e-12;
const EMBEDDEDNESS_ARC_FRACTION: f64 = 0.05;

/// A closed curve in R^2 or R^3 sampled at `n` uniform parameters `x_j = j/n`.
///
/// Closedness is implicit in the periodic representation; there is no
/// duplicated endpoint. Planar curves carry a zero third component.
#[derive(Debug, Clone)]
pub struct ClosedCurve<R> {
    points: Vec<V3<R>>,
    dim: usize,
}

impl<R: Real> ClosedCurve<R> {
    /// Wrap samples; `n` must be even and at least 16, `dim` 2 or 3.
    pub fn new(points: Vec<V3<R>>, dim: usize) -> Result<Self> {
        let n = points.len();
        if n < 16 || n % 2 != 0 {
            return Err(Error::invalid(format!(
                "sample count must be even and >= 16, got {n}"
            )));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid(format!("ambient dimension must be 2 or 3, got {dim}")));
        }
        for p in &points {
            if !(p[0].is_finite() && p[1].is_finite() && p[2].is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(ClosedCurve { points, dim })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[V3<R>] {
        &self.points
    }

    /// Apply a pointwise map (rotation, translation, ...); the result keeps `dim`.
    pub fn map_points(&self, f: impl Fn(&V3<R>) -> V3<R>) -> Result<Self> {
        ClosedCurve::new(self.points.iter().map(f).collect(), self.dim)
    }

    /// The curve scaled by `c` about the origin.
    pub fn scaled(&self, c: R) -> Self {
        ClosedCurve {
            points: self.points.iter().map(|p| vec3::scale(p, c)).collect(),
            dim: self.dim,
        }
    }
}

/// Round circle of the given radius in the plane.
pub fn circle<R: Real>(radius: R, n: usize) -> Result<ClosedCurve<R>> {
    if radius <= R::zero() {
        return Err(Error::invalid("circle radius must be positive"));
    }
    let two_pi = R::lit(2.0) * R::PI();
    let pts = (0..n)
        .map(|j| {
            let x = two_pi * R::lit(j as f64 / n as f64);
            [radius * x.cos(), radius * x.sin(), R::zero()]
        })
        .collect();
    ClosedCurve::new(pts, 2)
}

/// `(p, q)` torus knot on the torus with radii `big_r > small_r > 0`.
pub fn torus_knot<R: Real>(
    p: u32,
    q: u32,
    big_r: R,
    small_r: R,
    n: usize,
) -> Result<ClosedCurve<R>> {
    if p == 0 || q == 0 || gcd(p, q) != 1 {
        return Err(Error::invalid(format!("torus knot needs gcd(p, q) = 1, got ({p}, {q})")));
    }
    if !(small_r > R::zero() && big_r > small_r) {
        return Err(Error::invalid("torus knot needs R > r > 0"));
    }
    let two_pi = R::lit(2.0) * R::PI();
    let (pf, qf) = (R::lit(p as f64), R::lit(q as f64));
    let pts = (0..n)
        .map(|j| {
            let th = two_pi * R::lit(j as f64 / n as f64);
            let tube = big_r + small_r * (qf * th).cos();
            [
                tube * (pf * th).cos(),
                tube * (pf * th).sin(),
                small_r * (qf * th).sin(),
            ]
        })
        .collect();
    ClosedCurve::new(pts, 3)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Unit circle with a seeded band-limited radial perturbation.
///
/// The perturbation profile depends only on `(seed, amplitude, band)`, never
/// on `n`, so refinements of the same parameters sample the same curve.
pub fn fourier_perturbed_circle<R: Real>(
    seed: u64,
    amplitude: R,
    band: u32,
    n: usize,
) -> Result<ClosedCurve<R>> {
    if band < 2 {
        return Err(Error::invalid("perturbation band must be >= 2"));
    }
    if !(amplitude >= R::zero() && amplitude < R::lit(0.5)) {
        return Err(Error::invalid("perturbation amplitude must lie in [0, 0.5)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = Vec::new();
    let mut scale = 0.0f64;
    for _ in 2..=band {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        scale += a.hypot(b);
        coef.push((a, b));
    }
    let two_pi = R::lit(2.0) * R::PI();
    let pts = (0..n)
        .map(|j| {
            let x = R::lit(j as f64 / n as f64);
            let mut rho = R::one();
            for (m, (a, b)) in coef.iter().enumerate() {
                let kx = two_pi * R::lit((m + 2) as f64) * x;
                rho += amplitude * (R::lit(*a) * kx.cos() + R::lit(*b) * kx.sin()) / R::lit(scale);
            }
            let th = two_pi * x;
            [rho * th.cos(), rho * th.sin(), R::zero()]
        })
        .collect();
    ClosedCurve::new(pts, 2)
}

/// Spectral `order`-th parameter derivative sampled at the grid.
pub fn differentiate<R: Real>(curve: &ClosedCurve<R>, order: u32) -> Result<Vec<V3<R>>> {
    if order as usize > curve.n() / 4 {
        return Err(Error::invalid(format!(
            "derivative order {order} exceeds n/4 = {}",
            curve.n() / 4
        )));
    }
    spectral::differentiate_points(curve.points(), curve.dim(), order)
}

/// Cached differential geometry of a curve, with trigonometric interpolants
/// for off-grid evaluation of position, speed and cumulative arc length.
pub struct Geometry<R> {
    curve: ClosedCurve<R>,
    /// `gamma'(x_j)`.
    pub derivative: Vec<V3<R>>,
    /// `|gamma'(x_j)|`.
    pub speed: Vec<R>,
    /// Unit tangent.
    pub tangent: Vec<V3<R>>,
    /// Curvature vector (second arc-length derivative), normal-valued.
    pub curvature: Vec<V3<R>>,
    /// Total length `L = int |gamma'| dx`.
    pub length: R,
    /// Cumulative arc length `s(x_j)` with `s(x_0) = 0`.
    pub arc: Vec<R>,
    /// Centroid of the samples.
    pub mean: V3<R>,
    /// Samples with the centroid removed. Chords computed from these avoid
    /// the cancellation a large offset would otherwise inject.
    pub centered: Vec<V3<R>>,
    interp_gamma: Vec<TrigSeries<R>>,
    interp_speed: TrigSeries<R>,
    /// Interpolant of the periodic part `s(x) - L x`.
    interp_arc_periodic: TrigSeries<R>,
    arc_periodic_at_zero: R,
}

/// Position, speed and arc length at one off-grid parameter.
#[derive(Debug, Clone, Copy)]
pub struct PointEval<R> {
    pub gamma: V3<R>,
    /// Position relative to the centroid (`gamma - mean`).
    pub gamma_centered: V3<R>,
    pub speed: R,
    pub arc: R,
}

impl<R: Real> Geometry<R> {
    pub fn curve(&self) -> &ClosedCurve<R> {
        &self.curve
    }

    pub fn n(&self) -> usize {
        self.curve.n()
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    pub fn points(&self) -> &[V3<R>] {
        self.curve.points()
    }

    /// Maximum relative deviation of the speed from its mean.
    pub fn speed_deviation(&self) -> R {
        let mut dev = R::zero();
        for &q in &self.speed {
            dev = dev.max((q - self.length).abs());
        }
        dev / self.length
    }

    /// Evaluate position, speed and arc length at an arbitrary parameter.
    pub fn eval_at(&self, x: R) -> PointEval<R> {
        let ph = Phases::at(x, self.n());
        let mut gamma_centered = vec3::zero();
        for (c, series) in self.interp_gamma.iter().enumerate() {
            gamma_centered[c] = series.eval(&ph);
        }
        let speed = self.interp_speed.eval(&ph);
        let arc = self.interp_arc_periodic.eval(&ph) - self.arc_periodic_at_zero + self.length * x;
        PointEval {
            gamma: vec3::add(&gamma_centered, &self.mean),
            gamma_centered,
            speed,
            arc,
        }
    }

    /// Length of the shorter arc between parameters `x` and `y`.
    pub fn intrinsic_distance(&self, x: R, y: R) -> R {
        let sx = self.eval_at(x).arc;
        let sy = self.eval_at(y).arc;
        self.arc_gap(sx, sy)
    }

    /// Shorter-arc distance between two grid samples.
    #[inline]
    pub fn intrinsic_distance_idx(&self, i: usize, j: usize) -> R {
        self.arc_gap(self.arc[i], self.arc[j])
    }

    #[inline]
    fn arc_gap(&self, si: R, sj: R) -> R {
        let mut a = (si - sj).abs();
        // parameters may wander outside [0,1); reduce mod L
        a = a - (a / self.length).floor() * self.length;
        a.min(self.length - a)
    }
}

/// Compute the geometry cache. Fails with [`Error::Regularity`] on
/// degenerate parameterizations.
pub fn geometry<R: Real>(curve: &ClosedCurve<R>) -> Result<Geometry<R>> {
    let n = curve.n();
    let dim = curve.dim();
    let derivative = spectral::differentiate_points(curve.points(), dim, 1)?;
    let second = spectral::differentiate_points(curve.points(), dim, 2)?;

    let speed: Vec<R> = derivative.iter().map(vec3::norm).collect();
    let max_speed = speed.iter().cloned().fold(R::zero(), R::max);
    let min_speed = speed.iter().cloned().fold(R::infinity(), R::min);
    if !(min_speed > R::lit(REGULARITY_THRESHOLD) * max_speed && max_speed > R::zero()) {
        return Err(Error::Regularity {
            min_speed: min_speed.as_f64(),
            threshold: REGULARITY_THRESHOLD,
        });
    }

    let tangent: Vec<V3<R>> = derivative
        .iter()
        .zip(&speed)
        .map(|(d, &q)| vec3::scale(d, R::one() / q))
        .collect();
    // kappa = (gamma'' - <gamma'', tau> tau) / |gamma'|^2
    let curvature: Vec<V3<R>> = second
        .iter()
        .zip(tangent.iter().zip(&speed))
        .map(|(dd, (tau, &q))| vec3::scale(&vec3::reject_unit(dd, tau), R::one() / (q * q)))
        .collect();

    let length = pairwise_sum(&speed) / R::lit(n as f64);

    // s(x) = L x + periodic part: integrate the speed spectrally.
    let coef = spectral::coefficients_scalar(&speed);
    let mut per_spec = vec![num_complex::Complex::new(R::zero(), R::zero()); n];
    let two_pi = R::lit(2.0) * R::PI();
    for (j, c) in coef.iter().enumerate() {
        let k = spectral::mode_of(j, n);
        if k != 0 {
            per_spec[j] = *c / num_complex::Complex::new(R::zero(), two_pi * R::lit(k as f64));
        }
    }
    let czero = num_complex::Complex::new(R::zero(), R::zero());
    // ifft_points divides by n; coefficients are already normalized.
    let per_pts: Vec<V3<num_complex::Complex<R>>> = per_spec
        .iter()
        .map(|&c| [c * R::lit(n as f64), czero, czero])
        .collect();
    let per: Vec<R> = spectral::ifft_points(&per_pts, 1)
        .into_iter()
        .map(|p| p[0])
        .collect();
    let per0 = per[0];
    let h = R::one() / R::lit(n as f64);
    let arc: Vec<R> = (0..n)
        .map(|j| length * h * R::lit(j as f64) + per[j] - per0)
        .collect();

    let inv_n = R::one() / R::lit(n as f64);
    let mut mean = vec3::zero();
    for p in curve.points() {
        vec3::axpy(&mut mean, inv_n, p);
    }
    let centered: Vec<V3<R>> = curve.points().iter().map(|p| vec3::sub(p, &mean)).collect();
    let interp_gamma = (0..dim)
        .map(|c| {
            let channel: Vec<R> = centered.iter().map(|p| p[c]).collect();
            TrigSeries::from_samples(&channel)
        })
        .collect();
    let interp_speed = TrigSeries::from_samples(&speed);
    let interp_arc_periodic = TrigSeries::from_samples(&per);

    Ok(Geometry {
        curve: curve.clone(),
        derivative,
        speed,
        tangent,
        curvature,
        length,
        arc,
        mean,
        centered,
        interp_gamma,
        interp_speed,
        interp_arc_periodic,
        arc_periodic_at_zero: per0,
    })
}

/// Resample the curve so `|gamma'|` is constant (equal to the length).
///
/// The inverse of the cumulative arc-length map is found by Newton iteration
/// on the spectral interpolant; the composition is sampled on a 4x grid and
/// low-passed back to `n` modes so no aliased content enters the result.
/// Truncating the composition perturbs the speed by the spectral tail, so on
/// coarse grids the pass is repeated until the deviation stops improving.
pub fn reparameterize_arclength<R: Real>(curve: &ClosedCurve<R>) -> Result<ClosedCurve<R>> {
    let mut out = reparameterize_pass(curve)?;
    for _ in 0..3 {
        let dev = geometry(&out)?.speed_deviation();
        if dev < R::lit(1e-10) {
            break;
        }
        let refined = reparameterize_pass(&out)?;
        if geometry(&refined)?.speed_deviation() >= dev {
            break;
        }
        out = refined;
    }
    Ok(out)
}

fn reparameterize_pass<R: Real>(curve: &ClosedCurve<R>) -> Result<ClosedCurve<R>> {
    let geom = geometry(curve)?;
    let n = curve.n();
    let dim = curve.dim();
    let oversample = 4;
    let m = oversample * n;
    let length = geom.length;

    // Solve s(x_u) = L u for each target u = j/m.
    let mut xs = vec![R::zero(); m];
    for j in 0..m {
        let u = R::lit(j as f64 / m as f64);
        let mut x = u;
        for _ in 0..60 {
            let ev = geom.eval_at(x);
            let f = ev.arc - length * u;
            x = x - f / ev.speed;
            if f.abs() < R::lit(1e-14) * length {
                break;
            }
        }
        xs[j] = x;
    }

    // Sample the composition on the fine grid.
    let fine: Vec<V3<R>> = xs.iter().map(|&x| geom.eval_at(x).gamma).collect();

    // Low-pass to the n-point grid: keep modes |k| <= n/2, fold both
    // half-Nyquist bins into the target Nyquist slot.
    let spec_fine = spectral::fft_points(&fine, dim);
    let czero = num_complex::Complex::new(R::zero(), R::zero());
    let mut spec: Vec<V3<num_complex::Complex<R>>> = vec![[czero; 3]; n];
    let scale = R::lit(n as f64 / m as f64);
    for (j, slot) in spec.iter_mut().enumerate() {
        let k = spectral::mode_of(j, n);
        let src = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
        for c in 0..dim {
            slot[c] = spec_fine[src][c] * scale;
        }
    }
    let half = n / 2;
    let src_neg = m - half;
    for c in 0..dim {
        spec[half][c] = spec[half][c] + spec_fine[src_neg][c] * scale;
    }
    let pts = spectral::ifft_points(&spec, dim);
    ClosedCurve::new(pts, dim)
}

/// Scale-free bi-Lipschitz constant: the maximum over distinct sample pairs
/// of intrinsic distance over chord. Equals `pi/2` for round circles.
pub fn bilipschitz_constant<R: Real>(geom: &Geometry<R>) -> Result<R> {
    let n = geom.n();
    let pts = &geom.centered;
    let length = geom.length;
    let chord_limit = R::lit(EMBEDDEDNESS_CHORD_LIMIT) * length;
    let arc_guard = R::lit(EMBEDDEDNESS_ARC_FRACTION) * length;
    use rayon::prelude::*;
    let rows: Vec<std::result::Result<R, Error>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = R::zero();
            for j in (i + 1)..n {
                let chord = vec3::dist(&pts[i], &pts[j]);
                let arc = geom.intrinsic_distance_idx(i, j);
                if chord < chord_limit {
                    if arc > arc_guard {
                        return Err(Error::Embeddedness {
                            chord: chord.as_f64(),
                            arc: arc.as_f64(),
                            limit: chord_limit.as_f64(),
                        });
                    }
                    continue;
                }
                best = best.max(arc / chord);
            }
            Ok(best)
        })
        .collect();
    let mut best = R::zero();
    for r in rows {
        best = best.max(r?);
    }
    Ok(best)
}
