//! Exact rational arithmetic for the separation scanner.
//!
//! Separation distances between composed similarity maps are tiny and
//! structured; deciding whether two translations coincide must not depend on
//! float rounding. When every system parameter is rational the whole
//! translation calculus stays rational, so the scanner can bucket ratio
//! products by exact equality and report exact distances.
//!
//! Numerator and denominator are `i128` and every operation is
//! overflow-checked. That covers products of a few dozen ratios with
//! denominators in the thousands, which is the intended desk scale; deeper
//! scans on wilder denominators fail loudly with [`Error::Overflow`] rather
//! than silently losing exactness.

use crate::{Error, Result};
use core::cmp::Ordering;
use core::fmt;

/// An exact rational number, always stored reduced with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

impl Rational {
    /// Builds `num/den`, reducing to lowest terms. `den` must be nonzero.
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::Invalid("rational with zero denominator".into()));
        }
        let g = gcd(num, den);
        let (mut n, mut d) = if g == 0 { (0, 1) } else { (num / g, den / g) };
        if d < 0 {
            n = n.checked_neg().ok_or_else(overflow)?;
            d = d.checked_neg().ok_or_else(overflow)?;
        }
        Ok(Rational { num: n, den: d })
    }

    /// The integer `n` as a rational.
    pub fn integer(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    /// Zero.
    pub fn zero() -> Self {
        Rational::integer(0)
    }

    /// One.
    pub fn one() -> Self {
        Rational::integer(1)
    }

    /// Numerator of the reduced form.
    pub fn numer(&self) -> i128 {
        self.num
    }

    /// Denominator of the reduced form (always positive).
    pub fn denom(&self) -> i128 {
        self.den
    }

    /// True when the value is zero.
    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Checked sum.
    pub fn add(&self, other: &Rational) -> Result<Rational> {
        // a/b + c/d = (a*(d/g) + c*(b/g)) / lcm(b, d), g = gcd(b, d).
        let g = gcd(self.den, other.den);
        let db = self.den / g;
        let dd = other.den / g;
        let lhs = self.num.checked_mul(dd).ok_or_else(overflow)?;
        let rhs = other.num.checked_mul(db).ok_or_else(overflow)?;
        let num = lhs.checked_add(rhs).ok_or_else(overflow)?;
        let den = self.den.checked_mul(dd).ok_or_else(overflow)?;
        Rational::new(num, den)
    }

    /// Checked difference.
    pub fn sub(&self, other: &Rational) -> Result<Rational> {
        self.add(&other.neg())
    }

    /// Checked product.
    pub fn mul(&self, other: &Rational) -> Result<Rational> {
        // Cross-reduce before multiplying to keep intermediates small.
        let g1 = gcd(self.num, other.den);
        let g2 = gcd(other.num, self.den);
        let (a, d) = (self.num / g1.max(1), other.den / g1.max(1));
        let (c, b) = (other.num / g2.max(1), self.den / g2.max(1));
        let num = a.checked_mul(c).ok_or_else(overflow)?;
        let den = b.checked_mul(d).ok_or_else(overflow)?;
        Rational::new(num, den)
    }

    /// Negation.
    pub fn neg(&self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }

    /// Absolute value.
    pub fn abs(&self) -> Rational {
        Rational {
            num: self.num.abs(),
            den: self.den,
        }
    }

    /// Nearest double. Exact when numerator and denominator both fit in 53
    /// bits, which covers every value the scanner reports at desk scale.
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Parses `"p/q"`, an integer `"p"`, or a decimal string like `"0.65"`.
    pub fn parse(s: &str) -> Result<Rational> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let num: i128 = p.trim().parse().map_err(|_| bad_number(s))?;
            let den: i128 = q.trim().parse().map_err(|_| bad_number(s))?;
            return Rational::new(num, den);
        }
        if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad_number(s));
            }
            let negative = whole.trim_start().starts_with('-');
            let w: i128 = if whole == "-" || whole.is_empty() {
                0
            } else {
                whole.parse().map_err(|_| bad_number(s))?
            };
            let f: i128 = frac.parse().map_err(|_| bad_number(s))?;
            let mut den: i128 = 1;
            for _ in 0..frac.len() {
                den = den.checked_mul(10).ok_or_else(overflow)?;
            }
            let whole_part = w.checked_mul(den).ok_or_else(overflow)?;
            let num = if negative {
                whole_part.checked_sub(f).ok_or_else(overflow)?
            } else {
                whole_part.checked_add(f).ok_or_else(overflow)?
            };
            return Rational::new(num, den);
        }
        let num: i128 = s.parse().map_err(|_| bad_number(s))?;
        Ok(Rational::integer(num))
    }
}

fn overflow() -> Error {
    Error::Overflow("i128 rational arithmetic".into())
}

fn bad_number(s: &str) -> Error {
    Error::Invalid(alloc::format!("cannot parse '{s}' as a rational"))
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare a/b with c/d via a*d vs c*b; fall back to floats only on
        // overflow, which cannot occur for reduced desk-scale operands.
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
