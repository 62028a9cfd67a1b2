//! Closed f64 intervals with outward rounding.
//!
//! Elementary functions from libm are not correctly rounded, so every result
//! is widened by two ulps on each side. Endpoints may be ±∞ (used for ln 0).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down().next_down()
    } else {
        x
    }
}

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up().next_up()
    } else {
        x
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn zero() -> Self {
        Self::point(0.0)
    }

    pub fn neg_infinity() -> Self {
        Self::point(f64::NEG_INFINITY)
    }

    pub fn ln2() -> Self {
        Self::new(down(std::f64::consts::LN_2), up(std::f64::consts::LN_2))
    }

    pub fn two_pi() -> Self {
        Self::new(down(std::f64::consts::TAU), up(std::f64::consts::TAU))
    }

    pub fn e() -> Self {
        Self::new(down(std::f64::consts::E), up(std::f64::consts::E))
    }

    /// Enclosure of a nonnegative integer that may not be representable.
    pub fn from_u128(k: u128) -> Self {
        let x = k as f64;
        if x as u128 == k && x < 9.007_199_254_740_992e15 {
            Self::point(x)
        } else {
            Self::new(x.next_down(), x.next_up())
        }
    }

    /// Enclosure of ln(x) for an exactly representable x ≥ 0.
    pub fn point_ln(x: f64) -> Self {
        if x == 1.0 {
            return Self::zero();
        }
        if x == 0.0 {
            return Self::neg_infinity();
        }
        let l = x.ln();
        Self::new(down(l), up(l))
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        if self.lo == self.hi {
            return 0.0;
        }
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lo - slack <= x && x <= self.hi + slack
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    /// Multiplication by an exact scalar.
    pub fn scale(&self, s: f64) -> Interval {
        if s == 0.0 || *self == Interval::zero() {
            return Interval::zero();
        }
        let (a, b) = (self.lo * s, self.hi * s);
        let (a, b) = if s > 0.0 { (a, b) } else { (b, a) };
        Interval::new(down(a), up(b))
    }

    pub fn exp(&self) -> Interval {
        let lo = if self.lo == f64::NEG_INFINITY { 0.0 } else { down(self.lo.exp()).max(0.0) };
        Interval::new(lo, up(self.hi.exp()))
    }

    pub fn ln(&self) -> Interval {
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { down(self.lo.ln()) };
        let hi = if self.hi <= 0.0 { f64::NEG_INFINITY } else { up(self.hi.ln()) };
        Interval::new(lo, hi)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lo >= 0.0
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        let lo = self.lo + rhs.lo;
        let hi = self.hi + rhs.hi;
        if self.width() == 0.0 && rhs.width() == 0.0 && (self.lo == 0.0 || rhs.lo == 0.0) {
            return Interval::new(lo, hi);
        }
        Interval::new(down(lo), up(hi))
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        if self == Interval::zero() || rhs == Interval::zero() {
            return Interval::zero();
        }
        let c = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

/// Reports carry intervals as `[lo, hi]`; infinities become strings.
impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(2))?;
        for x in [self.lo, self.hi] {
            if x.is_finite() {
                seq.serialize_element(&x)?;
            } else if x > 0.0 {
                seq.serialize_element("inf")?;
            } else if x < 0.0 {
                seq.serialize_element("-inf")?;
            } else {
                seq.serialize_element("nan")?;
            }
        }
        seq.end()
    }
}
