//! Thin wrappers around `libm` so the crate stays `no_std`-clean.

pub const PI: f64 = core::f64::consts::PI;
pub const TAU: f64 = core::f64::consts::TAU;

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// e^{2πiθ} as a complex number.
#[inline]
pub fn cis_tau(theta: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(cos(TAU * theta), sin(TAU * theta))
}

/// Euclidean remainder for grid indices.
#[inline]
pub fn wrap_index(i: i64, period: i64) -> usize {
    debug_assert!(period > 0);
    i.rem_euclid(period) as usize
}
