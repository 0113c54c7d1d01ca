//! Small helpers on `[R; 3]` points.
//!
//! Curves live in R^2 or R^3; planar curves keep a zero third component so
//! all inner products and norms can run on fixed-size arrays.

use crate::real::Real;

pub type V3<R> = [R; 3];

#[inline]
pub fn zero<R: Real>() -> V3<R> {
    [R::zero(); 3]
}

#[inline]
pub fn dot<R: Real>(a: &V3<R>, b: &V3<R>) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm_sq<R: Real>(a: &V3<R>) -> R {
    dot(a, a)
}

#[inline]
pub fn norm<R: Real>(a: &V3<R>) -> R {
    norm_sq(a).sqrt()
}

#[inline]
pub fn sub<R: Real>(a: &V3<R>, b: &V3<R>) -> V3<R> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add<R: Real>(a: &V3<R>, b: &V3<R>) -> V3<R> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale<R: Real>(a: &V3<R>, c: R) -> V3<R> {
    [a[0] * c, a[1] * c, a[2] * c]
}

/// `acc += c * v`
#[inline]
pub fn axpy<R: Real>(acc: &mut V3<R>, c: R, v: &V3<R>) {
    acc[0] += c * v[0];
    acc[1] += c * v[1];
    acc[2] += c * v[2];
}

#[inline]
pub fn dist<R: Real>(a: &V3<R>, b: &V3<R>) -> R {
    norm(&sub(a, b))
}

/// Remove from `v` its component along the unit vector `u`.
#[inline]
pub fn reject_unit<R: Real>(v: &V3<R>, u: &V3<R>) -> V3<R> {
    let p = dot(v, u);
    [v[0] - p * u[0], v[1] - p * u[1], v[2] - p * u[2]]
}
