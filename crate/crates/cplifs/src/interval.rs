//! Closed intervals on the real line.

use crate::math::FloatExt;
use crate::{Error, Result};
use core::fmt;

/// A closed interval `[lo, hi]`, possibly degenerate (`lo == hi`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Builds `[lo, hi]`; requires `lo <= hi` and finite endpoints.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Invalid("interval endpoints must be finite".into()));
        }
        if lo > hi {
            return Err(Error::Invalid("interval endpoints out of order".into()));
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Left endpoint.
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Right endpoint.
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Length `hi - lo`.
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// True when the interval is a single point.
    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Closed containment of a point.
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Closed containment of another interval.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Distance from a point to the interval (zero inside).
    pub fn dist(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.minf(other.lo),
            hi: self.hi.maxf(other.hi),
        }
    }

    /// Midpoint.
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed_and_nonfinite_endpoints() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn containment_is_closed() {
        let i = Interval::new(0.0, 1.0).unwrap();
        assert!(i.contains(0.0));
        assert!(i.contains(1.0));
        assert!(!i.contains(1.0 + 1e-15));
    }

    #[test]
    fn degenerate_interval_behaves() {
        let p = Interval::point(2.0);
        assert!(p.is_degenerate());
        assert_eq!(p.len(), 0.0);
        assert!(p.contains(2.0));
        assert_eq!(p.dist(3.0), 1.0);
    }

    #[test]
    fn hull_and_dist() {
        let a = Interval::new(0.0, 1.0).unwrap();
        let b = Interval::new(2.0, 3.0).unwrap();
        assert_eq!(a.hull(&b), Interval::new(0.0, 3.0).unwrap());
        assert_eq!(a.dist(-0.5), 0.5);
        assert_eq!(a.dist(0.5), 0.0);
        assert_eq!(a.dist(1.5), 0.5);
    }
}
