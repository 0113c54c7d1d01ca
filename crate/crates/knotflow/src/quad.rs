//! Quadrature building blocks: Gauss-Legendre panels, deterministic pairwise
//! summation, and the endpoint corrections used by the singular pair sums.
//!
//! The double sums in this crate integrate functions behaving like
//! `|w|^(2-alpha)` near the diagonal. On a uniform grid the rectangle sum of
//! such a term differs from its integral by an amount that depends only on
//! the exponent, the grid, and the exclusion half-width; [`navot_factor`]
//! returns that difference so a per-row coefficient turns it into an exact
//! correction. The coefficients themselves come from a three-point fit at a
//! fixed offset ([`band_coefficients`]), which avoids both the cancellation
//! blow-up of grid-tied offsets and hand-derived local expansions.

use crate::real::Real;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `(-1, 1)`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sum with a fixed reduction tree, independent of thread count.
pub fn pairwise_sum<R: Real>(xs: &[R]) -> R {
    if xs.len() <= 32 {
        let mut acc = R::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Difference between the integral of `d(w)^beta` over the periodic unit
/// interval (`d(w) = min(|w|, 1-|w|)`) and its rectangle sum over the grid
/// `w = j/n` with `|j| <= excl` excluded.
///
/// `beta` must exceed -1 so the integral exists.
pub fn navot_factor(beta: f64, n: usize, excl: usize) -> f64 {
    let h = 1.0 / n as f64;
    let integral = 2.0 * 0.5f64.powf(beta + 1.0) / (beta + 1.0);
    let mut vals = Vec::with_capacity(n - 2 * excl - 1);
    for j in (excl + 1)..(n - excl) {
        let w = j as f64 * h;
        vals.push(w.min(1.0 - w).powf(beta));
    }
    integral - h * pairwise_sum(&vals)
}

/// Recover `(C, D)` from samples of `G(w) = F(w) * w^(alpha-2)` at
/// `w0, w0/2, w0/4`, where `F(w) = C w^(2-alpha) + D w^(4-alpha) + O(w^(6-alpha))`
/// is the even part of a row integrand. `G` is even analytic, so
/// `G(w) = C + D w^2 + E w^4 + ...` and three points pin `C` and `D` with an
/// `O(w0^6)` residual.
pub fn band_coefficients<R: Real>(g1: R, g2: R, g3: R, w0: R) -> (R, R) {
    // Vandermonde solve in y = (w/w0)^2 at y = 1, 1/4, 1/16.
    let c = (g1 - R::lit(20.0) * g2 + R::lit(64.0) * g3) / R::lit(45.0);
    // E w0^4 then D w0^2 by back-substitution.
    let v = (g1 - R::lit(5.0) * g2 + R::lit(4.0) * g3) * R::lit(64.0 / 45.0);
    let u = (g2 - g3) * R::lit(16.0 / 3.0) - v * R::lit(5.0 / 16.0);
    let d = u / (w0 * w0);
    (c, d)
}

/// Offset at which band coefficients are extracted. Fixed (not grid-tied) so
/// the extraction stays well-conditioned as the grid refines.
pub const BAND_EXTRACTION_OFFSET: f64 = 1.0 / 32.0;
