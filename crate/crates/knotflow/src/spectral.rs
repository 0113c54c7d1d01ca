//! Periodic spectral machinery: FFT-based differentiation, Fourier-multiplier
//! application, and trigonometric interpolation at off-grid points.
//!
//! Grids are uniform on the unit circle, `x_j = j/n`, with `n` even. Mode
//! indices follow the usual FFT layout `0, 1, ..., n/2-1, -n/2, ..., -1`.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::vec3::V3;

/// Signed mode number of FFT bin `j` on an `n`-point grid.
#[inline]
pub fn mode_of(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn check_finite<R: Real>(pts: &[V3<R>]) -> Result<()> {
    for p in pts {
        if !(p[0].is_finite() && p[1].is_finite() && p[2].is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(())
}

/// Forward DFT of each coordinate channel; output is unnormalized.
pub(crate) fn fft_points<R: Real>(pts: &[V3<R>], dim: usize) -> Vec<V3<Complex<R>>> {
    let n = pts.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut out = vec![[Complex::new(R::zero(), R::zero()); 3]; n];
    let mut buf = vec![Complex::new(R::zero(), R::zero()); n];
    for c in 0..dim {
        for (j, p) in pts.iter().enumerate() {
            buf[j] = Complex::new(p[c], R::zero());
        }
        fft.process(&mut buf);
        for j in 0..n {
            out[j][c] = buf[j];
        }
    }
    out
}

pub(crate) fn ifft_points<R: Real>(spec: &[V3<Complex<R>>], dim: usize) -> Vec<V3<R>> {
    let n = spec.len();
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    let scale = R::one() / R::lit(n as f64);
    let mut out = vec![[R::zero(); 3]; n];
    let mut buf = vec![Complex::new(R::zero(), R::zero()); n];
    for c in 0..dim {
        for j in 0..n {
            buf[j] = spec[j][c];
        }
        ifft.process(&mut buf);
        for j in 0..n {
            out[j][c] = buf[j].re * scale;
        }
    }
    out
}

/// Spectral `order`-th parameter derivative of a sampled point field.
///
/// Each mode is multiplied by `(2 pi i k)^order`; the unmatched Nyquist mode
/// is zeroed for odd orders.
pub fn differentiate_points<R: Real>(
    pts: &[V3<R>],
    dim: usize,
    order: u32,
) -> Result<Vec<V3<R>>> {
    check_finite(pts)?;
    let n = pts.len();
    if order == 0 {
        return Ok(pts.to_vec());
    }
    // Remove the mean first: it only feeds mode zero, which every derivative
    // kills, but a large offset (translated curves) would otherwise leak
    // rounding noise into all modes through the transform.
    let inv_n = R::one() / R::lit(n as f64);
    let mut mean = [R::zero(); 3];
    for p in pts {
        for c in 0..dim {
            mean[c] += p[c] * inv_n;
        }
    }
    let centered: Vec<V3<R>> = pts
        .iter()
        .map(|p| [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]])
        .collect();
    let mut spec = fft_points(&centered, dim);
    let two_pi = R::lit(2.0) * R::PI();
    for (j, v) in spec.iter_mut().enumerate() {
        let k = mode_of(j, n);
        let f = if k == -(n as i64) / 2 && order % 2 == 1 {
            Complex::new(R::zero(), R::zero())
        } else {
            Complex::new(R::zero(), two_pi * R::lit(k as f64)).powu(order)
        };
        for c in 0..dim {
            v[c] = v[c] * f;
        }
    }
    Ok(ifft_points(&spec, dim))
}

/// Apply a real symmetric Fourier symbol (indexed in FFT layout) to a point field.
pub fn apply_symbol_points<R: Real>(pts: &[V3<R>], dim: usize, symbol: &[R]) -> Vec<V3<R>> {
    let n = pts.len();
    assert_eq!(symbol.len(), n, "symbol length must match grid");
    let mut spec = fft_points(pts, dim);
    for j in 0..n {
        for c in 0..dim {
            spec[j][c] = spec[j][c] * symbol[j];
        }
    }
    ifft_points(&spec, dim)
}

/// Apply a real symmetric Fourier symbol to a scalar field.
pub fn apply_symbol_scalar<R: Real>(f: &[R], symbol: &[R]) -> Vec<R> {
    let pts: Vec<V3<R>> = f.iter().map(|&v| [v, R::zero(), R::zero()]).collect();
    apply_symbol_points(&pts, 1, symbol)
        .into_iter()
        .map(|p| p[0])
        .collect()
}

/// Spectral derivative of a scalar field.
pub fn differentiate_scalar<R: Real>(f: &[R], order: u32) -> Result<Vec<R>> {
    let pts: Vec<V3<R>> = f.iter().map(|&v| [v, R::zero(), R::zero()]).collect();
    Ok(differentiate_points(&pts, 1, order)?
        .into_iter()
        .map(|p| p[0])
        .collect())
}

/// Complex Fourier coefficients `c_k` (normalized, `f = sum c_k e^{2 pi i k x}`)
/// of a scalar field, in FFT layout.
pub fn coefficients_scalar<R: Real>(f: &[R]) -> Vec<Complex<R>> {
    let pts: Vec<V3<R>> = f.iter().map(|&v| [v, R::zero(), R::zero()]).collect();
    let n = f.len();
    let scale = R::one() / R::lit(n as f64);
    fft_points(&pts, 1)
        .into_iter()
        .map(|v| v[0] * scale)
        .collect()
}

/// Real trigonometric series for one scalar channel on an `n`-point grid.
///
/// `f(x) = a[0] + sum_{k=1}^{n/2-1} (a[k] cos(2 pi k x) + b[k] sin(2 pi k x))
///        + a[n/2] cos(pi n x)` — the symmetric interpolant of the samples.
#[derive(Debug, Clone)]
pub struct TrigSeries<R> {
    a: Vec<R>,
    b: Vec<R>,
}

impl<R: Real> TrigSeries<R> {
    pub fn from_samples(f: &[R]) -> Self {
        let n = f.len();
        let coef = coefficients_scalar(f);
        let half = n / 2;
        let two = R::lit(2.0);
        let mut a = vec![R::zero(); half + 1];
        let mut b = vec![R::zero(); half + 1];
        a[0] = coef[0].re;
        for k in 1..half {
            a[k] = two * coef[k].re;
            b[k] = -two * coef[k].im;
        }
        a[half] = coef[half].re;
        TrigSeries { a, b }
    }

    pub fn eval(&self, ph: &Phases<R>) -> R {
        let half = self.a.len() - 1;
        let mut acc = self.a[0];
        for k in 1..half {
            acc += self.a[k] * ph.cos[k] + self.b[k] * ph.sin[k];
        }
        // Nyquist: cos(pi n x) = cos(2 pi (n/2) x)
        acc + self.a[half] * ph.cos[half]
    }
}

/// Precomputed `cos/sin(2 pi k x)` for `k = 0..=n/2`, shared across channels.
pub struct Phases<R> {
    cos: Vec<R>,
    sin: Vec<R>,
}

impl<R: Real> Phases<R> {
    pub fn at(x: R, n: usize) -> Self {
        let half = n / 2;
        let mut cos = vec![R::zero(); half + 1];
        let mut sin = vec![R::zero(); half + 1];
        cos[0] = R::one();
        let two_pi = R::lit(2.0) * R::PI();
        let (s1, c1) = (two_pi * x).sin_cos();
        for k in 1..=half {
            // rotation recurrence, refreshed periodically to cap drift
            if k % 32 == 1 {
                let xk = x * R::lit(k as f64);
                let frac = xk - xk.floor();
                let (s, c) = (two_pi * frac).sin_cos();
                cos[k] = c;
                sin[k] = s;
            } else {
                cos[k] = cos[k - 1] * c1 - sin[k - 1] * s1;
                sin[k] = sin[k - 1] * c1 + cos[k - 1] * s1;
            }
        }
        Phases { cos, sin }
    }
}
