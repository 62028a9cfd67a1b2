//! Exact coefficients in Q or Q(i).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::parse_rational;

/// The coefficient field a series or germ lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "Q")]
    Rational,
    #[serde(rename = "Q(i)")]
    Gaussian,
}

impl Field {
    pub fn admits(self, c: &Coefficient) -> bool {
        match self {
            Field::Rational => c.is_real(),
            Field::Gaussian => true,
        }
    }

    /// Smallest field containing both.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Gaussian || other == Field::Gaussian {
            Field::Gaussian
        } else {
            Field::Rational
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => f.write_str("Q"),
            Field::Gaussian => f.write_str("Q(i)"),
        }
    }
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Q" | "q" | "rational" => Ok(Field::Rational),
            "Q(i)" | "q(i)" | "gaussian" => Ok(Field::Gaussian),
            other => Err(format!("unknown field `{other}` (expected `Q` or `Q(i)`)")),
        }
    }
}

/// An element `re + im·i` with `re, im ∈ Q`.
///
/// Both parts are kept as reduced `BigRational`s, so the canonical form
/// (coprime numerator/denominator, positive denominator) holds at all times.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coefficient {
    re: BigRational,
    im: BigRational,
}

impl Coefficient {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn i() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn field(&self) -> Field {
        if self.is_real() {
            Field::Rational
        } else {
            Field::Gaussian
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|² as an exact rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.is_real() {
            return Some(Self::real(self.re.recip()));
        }
        let n = self.norm_sqr();
        Some(Self {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Zero for Coefficient {
    fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for Coefficient {
    fn one() -> Self {
        Self::real(BigRational::one())
    }
}

impl<'a> Add<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;

    fn add(self, rhs: &'a Coefficient) -> Coefficient {
        Coefficient {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Add for Coefficient {
    type Output = Coefficient;

    fn add(self, rhs: Coefficient) -> Coefficient {
        &self + &rhs
    }
}

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        self.re += &rhs.re;
        if !rhs.im.is_zero() {
            self.im += &rhs.im;
        }
    }
}

impl SubAssign<&Coefficient> for Coefficient {
    fn sub_assign(&mut self, rhs: &Coefficient) {
        self.re -= &rhs.re;
        if !rhs.im.is_zero() {
            self.im -= &rhs.im;
        }
    }
}

impl<'a> Sub<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;

    fn sub(self, rhs: &'a Coefficient) -> Coefficient {
        Coefficient {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Sub for Coefficient {
    type Output = Coefficient;

    fn sub(self, rhs: Coefficient) -> Coefficient {
        &self - &rhs
    }
}

impl<'a> Mul<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;

    fn mul(self, rhs: &'a Coefficient) -> Coefficient {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Coefficient::real(&self.re * &rhs.re);
        }
        Coefficient {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Mul for Coefficient {
    type Output = Coefficient;

    fn mul(self, rhs: Coefficient) -> Coefficient {
        &self * &rhs
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;

    fn neg(self) -> Coefficient {
        Coefficient {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;

    fn neg(self) -> Coefficient {
        Coefficient {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl From<BigRational> for Coefficient {
    fn from(r: BigRational) -> Self {
        Coefficient::real(r)
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Coefficient::from_integer(n)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Coefficient {
    type Err = String;

    /// Accepts `p/q`, `a+bi`, `a-bi`, `bi`, `i`, `-i` (whitespace ignored).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err("empty coefficient".into());
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Coefficient::real(parse_rational(&t)?));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (re_part, im_part) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("", body),
        };
        let im = match im_part {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other))?,
        };
        let re = if re_part.is_empty() {
            BigRational::zero()
        } else {
            parse_rational(re_part)?
        };
        Ok(Coefficient { re, im })
    }
}

impl Serialize for Coefficient {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_real_and_gaussian_forms() {
        assert_eq!("3/6".parse::<Coefficient>().unwrap(), Coefficient::from_ratio(1, 2));
        let z: Coefficient = "1/2-3i".parse().unwrap();
        assert_eq!(z.re(), &BigRational::new(1.into(), 2.into()));
        assert_eq!(z.im(), &BigRational::from_integer((-3).into()));
        assert_eq!("-i".parse::<Coefficient>().unwrap(), -Coefficient::i());
        assert_eq!("2/3i".parse::<Coefficient>().unwrap().im(), &BigRational::new(2.into(), 3.into()));
        assert!("1/0".parse::<Coefficient>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "-7/3", "1/2+5i", "-1-1/4i", "3i"] {
            let c: Coefficient = s.parse().unwrap();
            assert_eq!(c.to_string().parse::<Coefficient>().unwrap(), c);
        }
    }

    #[test]
    fn gaussian_inverse() {
        let z: Coefficient = "1+2i".parse().unwrap();
        let w = z.inv().unwrap();
        assert_eq!(&z * &w, Coefficient::one());
        assert!(Coefficient::zero().inv().is_none());
    }
}
