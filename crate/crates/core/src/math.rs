//! Float helpers backed by `libm`, so the crate stays `no_std`.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
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
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
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
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|a| a * a).sum())
}

/// Smallest power of two that is strictly greater than `x` (`x >= 0`).
pub fn next_pow2_above(x: f64) -> f64 {
    let mut p = 1.0;
    while p <= x {
        p *= 2.0;
    }
    while p / 2.0 > x && p > f64::MIN_POSITIVE {
        p /= 2.0;
    }
    p
}
