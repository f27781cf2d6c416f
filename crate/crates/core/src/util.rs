//! Small numeric helpers shared by the model, hashing, and filter layers.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// e^{2πi·cycles}.
///
/// The argument is reduced to [-1/2, 1/2] cycles before calling sin/cos so
/// large phases keep full fractional precision.
#[inline]
pub fn unit_phase(cycles: f64) -> Complex64 {
    let reduced = cycles - cycles.round();
    let (sin, cos) = (TAU * reduced).sin_cos();
    Complex64::new(cos, sin)
}

/// Wraps `x` into the half-open interval [-width/2, width/2).
#[inline]
pub fn fold_into(x: f64, width: f64) -> f64 {
    let half = width / 2.0;
    let mut y = (x + half).rem_euclid(width) - half;
    // rem_euclid can return exactly `width` after rounding when x is a tiny
    // negative multiple of width; renormalize.
    if y >= half {
        y -= width;
    }
    if y < -half {
        y += width;
    }
    y
}

/// Smallest power of two (as a real) that is >= x. Requires x > 0.
pub fn next_pow2_f64(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "next_pow2_f64 needs finite x > 0");
    let mut p = x.log2().ceil().exp2();
    while p < x {
        p *= 2.0;
    }
    while p / 2.0 >= x {
        p /= 2.0;
    }
    p
}

/// Smallest power of two (as an integer) that is >= x. Requires x > 0.
pub fn next_pow2_u64(x: f64) -> u64 {
    let p = next_pow2_f64(x);
    assert!(p <= u64::MAX as f64 / 2.0, "power of two overflows u64");
    p as u64
}

/// True for finite x > 0; rejects NaN and infinities.
#[inline]
pub fn finite_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// True when `x` is exactly a (real) power of two.
pub fn is_pow2_f64(x: f64) -> bool {
    x > 0.0 && x.is_finite() && x.log2().fract() == 0.0
}

/// Euclidean distance between two vectors of equal length.
#[inline]
pub fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// sgn per the convention used throughout: sgn(x) = 1 for x >= 0, else -1.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
