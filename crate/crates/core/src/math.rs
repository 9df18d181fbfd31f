// libm shims so the crate does not depend on std's float intrinsics.

pub use core::f64::consts::PI;
pub const EPS: f64 = f64::EPSILON;

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// `f^k` for a non-negative integer exponent, computed as `exp(k ln f)`.
#[inline]
pub fn powk(f: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else if f == 0.0 {
        0.0
    } else {
        exp(k * ln(f))
    }
}

/// Floor that snaps values lying within relative `1e-12` of an integer onto
/// that integer. Products `n * alpha` with an exactly rational `alpha` land a
/// few ulps either side of the true integer after `acos` and a division.
#[inline]
pub fn floor_snapped(v: f64) -> f64 {
    let r = round(v);
    if abs(v - r) <= 1e-12 * if abs(v) > 1.0 { abs(v) } else { 1.0 } {
        r
    } else {
        floor(v)
    }
}
