//! Float helpers for `no_std` builds.
//!
//! Core does not provide the transcendental `f64` methods, so the crate
//! routes them through `libm`. The trait keeps call sites reading like
//! ordinary float code.

// Test builds pull `std` into the crate graph, whose inherent `f64`
// methods shadow these; the trait then looks partly unused even though
// non-test builds depend on it.
#[allow(dead_code)]
pub(crate) trait FloatExt {
    fn abs(self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn sqrt(self) -> Self;
    fn floor(self) -> Self;
    fn round(self) -> Self;
    fn maxf(self, other: Self) -> Self;
    fn minf(self, other: Self) -> Self;
}

impl FloatExt for f64 {
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    fn ln(self) -> f64 {
        libm::log(self)
    }
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    fn round(self) -> f64 {
        libm::round(self)
    }
    fn maxf(self, other: f64) -> f64 {
        if self > other || other.is_nan() {
            self
        } else {
            other
        }
    }
    fn minf(self, other: f64) -> f64 {
        if self < other || other.is_nan() {
            self
        } else {
            other
        }
    }
}
