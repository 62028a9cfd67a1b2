//! Rational parsing and rigorous logarithms of exact numbers.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::interval::Interval;

/// Parses `p`, `p/q`, or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((n, d)) = t.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in `{t}`"))?;
        let den: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in `{t}`"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{t}`"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal `{t}`"));
        }
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let num: BigInt = digits.parse().map_err(|_| format!("bad decimal `{t}`"))?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| format!("bad integer `{t}`"))?;
    Ok(BigRational::from_integer(n))
}

/// Exact conversion of a finite f64 into a rational (every finite double is dyadic).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rational_pow(base: &BigRational, exp: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Enclosure of ln(n) for a positive big integer.
pub fn ln_bigint(n: &BigInt) -> Interval {
    assert!(n.sign() == Sign::Plus, "ln of non-positive integer");
    let bits = n.bits();
    if bits <= 53 {
        let x = n.to_f64().expect("small integer");
        return Interval::point_ln(x);
    }
    let shift = bits.saturating_sub(60);
    let top: BigInt = n >> shift;
    let top = top.to_u64().expect("60-bit prefix");
    // n ∈ [top, top + 1) · 2^shift
    let lo = Interval::point_ln(f64_below(top)).lo;
    let hi = Interval::point_ln(f64_above(top + 1)).hi;
    let ln2 = Interval::ln2();
    Interval::new(lo, hi) + ln2.scale(shift as f64)
}

fn f64_below(u: u64) -> f64 {
    let x = u as f64;
    if x as u128 > u as u128 { x.next_down() } else { x }
}

fn f64_above(u: u64) -> f64 {
    let x = u as f64;
    if (x as u128) < u as u128 { x.next_up() } else { x }
}

/// Enclosure of ln(r) for a positive rational.
pub fn ln_rational(r: &BigRational) -> Interval {
    assert!(r.is_positive(), "ln of non-positive rational");
    if r.is_one() {
        return Interval::zero();
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Enclosure of a positive rational as an f64 interval.
pub fn rational_interval(r: &BigRational) -> Interval {
    if r.is_zero() {
        return Interval::zero();
    }
    if r.is_negative() {
        return -rational_interval(&-r.clone());
    }
    match r.to_f64() {
        Some(x) if x.is_finite() && x > 0.0 && x > f64::MIN_POSITIVE => Interval::new(
            x.next_down().next_down(),
            x.next_up().next_up(),
        ),
        _ => ln_rational(r).exp(),
    }
}

/// Enclosure of ln(n!) for any n (exact product for small n, Stirling with
/// the alternating-series remainder bound otherwise).
pub fn ln_factorial(n: u128) -> Interval {
    if n < 2 {
        return Interval::zero();
    }
    if n <= 170 {
        return ln_bigint(&factorial(n as u64));
    }
    let x = n as f64;
    let xi = Interval::new((n as f64).next_down(), (n as f64).next_up());
    // ln n! = n ln n − n + ½ ln(2πn) + 1/(12n) − θ/(360 n³),  θ ∈ (0, 1)
    let ln_n = xi.ln();
    let main = xi * ln_n - xi + (Interval::two_pi() * xi).ln().scale(0.5);
    let corr_hi = 1.0 / (12.0 * x);
    let corr_lo = corr_hi - 1.0 / (360.0 * x * x * x);
    main + Interval::new(corr_lo.next_down(), corr_hi.next_up())
}

/// Largest k ≥ 0 with k^e ≤ x (integer e-th root, floor).
pub fn integer_root_floor(x: &BigInt, e: u32) -> BigInt {
    if x.is_zero() || e == 1 {
        return x.clone();
    }
    x.nth_root(e)
}

/// ceil(a / b) for positive b.
pub fn ceil_div(a: i64, b: i64) -> i64 {
    num_integer::Integer::div_ceil(&a, &b)
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
