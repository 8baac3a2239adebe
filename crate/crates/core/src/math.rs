//! Thin wrappers over `libm` so results do not depend on whether `std` is linked.

use core::f64::consts::{PI, TAU};

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
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
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Complex modulus via `libm::hypot`.
///
/// `num_complex::Complex64::norm` switches to the `std` implementation when any
/// crate in the build enables `num-traits/std`, which can change the last bit.
pub trait Modulus {
    fn modulus(&self) -> f64;
}

impl Modulus for num_complex::Complex64 {
    #[inline]
    fn modulus(&self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

/// Reduces an angle to `[0, 2π)`.
#[inline]
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta - TAU * floor(theta / TAU);
    // floor rounding can land exactly on 2π (or a hair outside) for tiny negatives
    if !(0.0..TAU).contains(&r) {
        0.0
    } else {
        r
    }
}

/// Signed angular difference `a - b` reduced to `(-π, π]`.
#[inline]
pub fn signed_delta(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
