//! Truncated Laurent series with exact coefficients and absolute precision.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exact::{ceil_div, Coefficient, Field};

use super::SeriesError;

/// A Laurent series `Σ_{e=v}^{T-1} c_e z^e + O(z^T)`.
///
/// `coeffs[i]` is the coefficient of `z^(valuation + i)`; the list always
/// covers every exponent up to `precision - 1`. A series with no nonzero
/// coefficient below its precision is stored with empty `coeffs` and
/// `valuation == precision`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    valuation: i64,
    coeffs: Vec<Coefficient>,
    precision: i64,
}

/// Which ring operation `series_arith` performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
    Pow(u32),
}

impl TruncatedSeries {
    /// Builds `Σ coeffs[i] z^(start+i) + O(z^precision)`; entries at or beyond
    /// `precision` are dropped.
    pub fn new(start: i64, coeffs: Vec<Coefficient>, precision: i64) -> Self {
        let mut s = Self {
            valuation: start,
            coeffs,
            precision,
        };
        let keep = (precision - start).max(0) as usize;
        s.coeffs.truncate(keep);
        if (s.coeffs.len() as i64) < precision - start {
            s.coeffs
                .resize((precision - start) as usize, Coefficient::zero());
        }
        s.normalize();
        s
    }

    pub fn zero(precision: i64) -> Self {
        Self {
            valuation: precision,
            coeffs: Vec::new(),
            precision,
        }
    }

    pub fn constant(c: Coefficient, precision: i64) -> Self {
        Self::new(0, vec![c], precision)
    }

    pub fn one(precision: i64) -> Self {
        Self::constant(Coefficient::one(), precision)
    }

    pub fn monomial(c: Coefficient, exponent: i64, precision: i64) -> Self {
        Self::new(exponent, vec![c], precision)
    }

    /// The variable itself, `z + O(z^precision)`.
    pub fn var(precision: i64) -> Self {
        Self::monomial(Coefficient::one(), 1, precision)
    }

    /// Sparse `(exponent, coefficient)` terms; repeated exponents add up.
    pub fn from_terms<I>(terms: I, precision: i64) -> Self
    where
        I: IntoIterator<Item = (i64, Coefficient)>,
    {
        let terms: Vec<(i64, Coefficient)> = terms.into_iter().collect();
        let start = terms.iter().map(|(e, _)| *e).min().unwrap_or(precision).min(precision);
        let mut coeffs = vec![Coefficient::zero(); (precision - start).max(0) as usize];
        for (e, c) in terms {
            if e < precision {
                coeffs[(e - start) as usize] += &c;
            }
        }
        Self::new(start, coeffs, precision)
    }

    /// Integer coefficients listed from exponent `start`.
    pub fn from_ints(start: i64, ints: &[i64], precision: i64) -> Self {
        Self::new(
            start,
            ints.iter().map(|&n| Coefficient::from_integer(n)).collect(),
            precision,
        )
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => {}
            Some(i) => {
                self.coeffs.drain(..i);
                self.valuation += i as i64;
            }
            None => {
                self.coeffs.clear();
                self.valuation = self.precision;
            }
        }
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// Number of known coefficients from the valuation on.
    pub fn relative_precision(&self) -> i64 {
        self.precision - self.valuation
    }

    /// Zero to the known precision.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coefficient(&self) -> Option<&Coefficient> {
        self.coeffs.first()
    }

    /// Coefficient of `z^e`; `None` when `e ≥ precision` (unknown).
    pub fn coeff(&self, e: i64) -> Option<Coefficient> {
        if e >= self.precision {
            return None;
        }
        if e < self.valuation {
            return Some(Coefficient::zero());
        }
        Some(self.coeffs[(e - self.valuation) as usize].clone())
    }

    fn coeff_ref(&self, e: i64) -> Option<&Coefficient> {
        if e < self.valuation || e >= self.precision {
            None
        } else {
            Some(&self.coeffs[(e - self.valuation) as usize])
        }
    }

    /// Nonzero terms below the precision.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Coefficient)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.valuation + i as i64, c))
    }

    /// Exponents of nonzero coefficients below the precision.
    pub fn support(&self) -> Vec<i64> {
        self.terms().map(|(e, _)| e).collect()
    }

    pub fn field(&self) -> Field {
        if self.coeffs.iter().all(Coefficient::is_real) {
            Field::Rational
        } else {
            Field::Gaussian
        }
    }

    /// Forgets everything at or beyond `precision`.
    pub fn truncate(&self, precision: i64) -> Self {
        if precision >= self.precision {
            return self.clone();
        }
        let keep = (precision - self.valuation).max(0) as usize;
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(keep);
        Self::new(self.valuation.min(precision), coeffs, precision)
    }

    /// Reinterprets a polynomial (every term known) at a larger precision,
    /// padding with zeros. Only meaningful when the caller knows the tail is 0.
    pub fn extend_exact(&self, precision: i64) -> Self {
        if precision <= self.precision {
            return self.truncate(precision);
        }
        let start = self.valuation.min(precision);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize((precision - start).max(0) as usize, Coefficient::zero());
        Self::new(start, coeffs, precision)
    }

    pub fn neg(&self) -> Self {
        Self {
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            precision: self.precision,
        }
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        if c.is_zero() {
            return Self::zero(self.precision);
        }
        Self {
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            precision: self.precision,
        }
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        self.scale(&Coefficient::real(r.clone()))
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            valuation: self.valuation + k,
            coeffs: self.coeffs.clone(),
            precision: self.precision + k,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let precision = self.precision.min(other.precision);
        let start = self.valuation.min(other.valuation).min(precision);
        let coeffs = (start..precision)
            .map(|e| match (self.coeff_ref(e), other.coeff_ref(e)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => Coefficient::zero(),
            })
            .collect();
        Self::new(start, coeffs, precision)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Adds the constant `c` (an exact scalar, so precision is unchanged).
    pub fn add_constant(&self, c: &Coefficient) -> Self {
        if c.is_zero() {
            return self.clone();
        }
        self.add(&Self::constant(c.clone(), self.precision.max(1)))
    }

    /// Product; the precision is `min(T_a + v_b, T_b + v_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let precision = (self.precision + other.valuation).min(other.precision + self.valuation);
        if self.is_zero() || other.is_zero() {
            return Self::zero(precision);
        }
        let start = self.valuation + other.valuation;
        let len = (precision - start).max(0) as usize;
        let mut coeffs = vec![Coefficient::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len || a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(len - i).enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += &(a * b);
                }
            }
        }
        Self::new(start, coeffs, precision)
    }

    /// Integer power; `pow(0)` is `1` known to the relative precision of `self`.
    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one(self.relative_precision().max(1));
        }
        let mut acc: Option<Self> = None;
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc.expect("n > 0")
    }

    /// Checked ring operation.
    ///
    /// Fails with `PrecisionExhausted` when a product or power carries no known
    /// coefficient at all (its precision does not exceed its valuation).
    pub fn arith(&self, other: &Self, op: SeriesOp) -> Result<Self, SeriesError> {
        let out = match op {
            SeriesOp::Add => return Ok(self.add(other)),
            SeriesOp::Sub => return Ok(self.sub(other)),
            SeriesOp::Mul => self.mul(other),
            SeriesOp::Pow(n) => self.pow(n),
        };
        if out.is_zero() {
            return Err(SeriesError::PrecisionExhausted {
                precision: out.precision,
            });
        }
        Ok(out)
    }

    /// Multiplicative inverse of `z^v·(c + …)`, known to `O(z^(T - 2v))`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let lead = self.leading_coefficient().ok_or(SeriesError::NotAUnit)?;
        let lead_inv = lead.inv().ok_or(SeriesError::NotAUnit)?;
        let n = self.relative_precision() as usize;
        let mut out: Vec<Coefficient> = Vec::with_capacity(n);
        out.push(lead_inv.clone());
        for k in 1..n {
            let mut acc = Coefficient::zero();
            for j in 1..=k {
                let a = &self.coeffs[j];
                if !a.is_zero() {
                    acc += &(a * &out[k - j]);
                }
            }
            out.push(-(&acc * &lead_inv));
        }
        Ok(Self::new(
            -self.valuation,
            out,
            -self.valuation + self.relative_precision(),
        ))
    }

    /// Inverse of a unit of the power-series ring (valuation 0); Laurent
    /// elements `z^v·unit` are accepted too.
    pub fn invert_unit(&self) -> Result<Self, SeriesError> {
        self.invert()
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&other.invert()?))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero(self.precision - 1);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.scale(&BigRational::from_integer((self.valuation + i as i64).into())))
            .collect();
        Self::new(self.valuation - 1, coeffs, self.precision - 1)
    }

    /// Substitutes `z ↦ z^k` (k ≥ 1).
    pub fn expand_power(&self, k: i64) -> Self {
        assert!(k >= 1);
        let terms = self.terms().map(|(e, c)| (e * k, c.clone()));
        let precision = self.precision * k;
        Self::from_terms(terms, precision)
    }

    /// `self(g(z))` for `g` of valuation ≥ 1 and `self` a power series.
    pub fn compose(&self, g: &Self) -> Result<Self, SeriesError> {
        if self.valuation < 0 {
            return Err(SeriesError::BadValuation {
                expected: "a power series (valuation ≥ 0)".into(),
                found: self.valuation,
            });
        }
        if g.valuation < 1 {
            return Err(SeriesError::BadValuation {
                expected: "an inner series with valuation ≥ 1".into(),
                found: g.valuation,
            });
        }
        // Horner from the O(z^T) tail: the tail O(w^T) becomes O(z^(T·v_g)).
        let mut acc = Self::zero(0);
        for e in (0..self.precision).rev() {
            acc = acc.mul(g);
            if let Some(c) = self.coeff_ref(e) {
                if !c.is_zero() {
                    acc = acc.add(&Self::constant(c.clone(), acc.precision.max(1)));
                }
            }
        }
        Ok(acc)
    }

    /// `(1 + h)^alpha` for `h` of valuation ≥ 1 via the binomial recurrence.
    pub fn unit_power(&self, alpha: &BigRational) -> Result<Self, SeriesError> {
        if self.valuation != 0 || self.leading_coefficient() != Some(&Coefficient::one()) {
            return Err(SeriesError::NotAUnit);
        }
        let n = self.precision.max(0) as usize;
        let mut f: Vec<Coefficient> = Vec::with_capacity(n);
        f.push(Coefficient::one());
        for m in 1..n {
            let mut acc = Coefficient::zero();
            for k in 1..=m {
                let u = &self.coeffs[k];
                if u.is_zero() {
                    continue;
                }
                // (alpha·k − (m − k)) U_k f_{m−k}
                let w = alpha * BigRational::from_integer((k as i64).into())
                    - BigRational::from_integer(((m - k) as i64).into());
                acc += &(&u.scale(&w) * &f[m - k]);
            }
            f.push(acc.scale(&BigRational::new(1.into(), (m as i64).into())));
        }
        Ok(Self::new(0, f, self.precision))
    }

    /// Compositional inverse of a series with valuation exactly 1, by
    /// Newton iteration with doubling precision.
    pub fn compositional_inverse(&self) -> Result<Self, SeriesError> {
        if self.valuation != 1 {
            return Err(SeriesError::BadValuation {
                expected: "valuation exactly 1".into(),
                found: self.valuation,
            });
        }
        let target = self.precision;
        let a1_inv = self.coeffs[0].inv().ok_or(SeriesError::NotAUnit)?;
        let mut h = Self::monomial(a1_inv, 1, 2.min(target));
        let mut prec = 2;
        while prec < target {
            prec = (2 * prec).min(target);
            let h_ext = h.extend_exact(prec);
            let g = self.truncate(prec);
            // h ← h − (g∘h − z)/(g'∘h)
            let gh = g.compose(&h_ext)?;
            let resid = gh.sub(&Self::var(prec));
            let dg = g.derivative().compose(&h_ext)?;
            let step = resid.div(&dg)?;
            h = h_ext.sub(&step).truncate(prec);
        }
        Ok(h.truncate(target))
    }

    /// Exact rational coefficient list from exponent 0 to `precision - 1`
    /// (only for power series).
    pub fn dense(&self) -> Vec<Coefficient> {
        (0..self.precision.max(0))
            .map(|e| self.coeff(e).unwrap_or_else(Coefficient::zero))
            .collect()
    }

    /// Splits into residue classes mod `p`: `self(z) = Σ_j z^j φ_j(z^p)`.
    pub fn residue_decompose(&self, p: i64) -> Vec<TruncatedSeries> {
        assert!(p >= 1);
        (0..p)
            .map(|j| {
                let precision = ceil_div(self.precision - j, p);
                let terms = self
                    .terms()
                    .filter(|(e, _)| e.rem_euclid(p) == j)
                    .map(|(e, c)| (e.div_euclid(p), c.clone()));
                TruncatedSeries::from_terms(terms, precision)
            })
            .collect()
    }

    /// Inverse of [`residue_decompose`](Self::residue_decompose).
    pub fn reassemble(parts: &[TruncatedSeries]) -> TruncatedSeries {
        let p = parts.len() as i64;
        parts
            .iter()
            .enumerate()
            .map(|(j, part)| part.expand_power(p).shift(j as i64))
            .reduce(|a, b| a.add(&b))
            .expect("at least one part")
    }

    /// Human-readable form with variable name `var`.
    pub fn display_with(&self, var: &str) -> String {
        let mut out = String::new();
        for (e, c) in self.terms() {
            let cs = c.to_string();
            let term = match e {
                0 => cs.clone(),
                _ => {
                    let mono = if e == 1 { var.to_string() } else { format!("{var}^{e}") };
                    if c.is_one() {
                        mono
                    } else if *c == -Coefficient::one() {
                        format!("-{mono}")
                    } else if c.is_real() {
                        format!("{cs}*{mono}")
                    } else {
                        format!("({cs})*{mono}")
                    }
                }
            };
            if !out.is_empty() && !term.starts_with('-') {
                out.push_str(" + ");
            } else if !out.is_empty() {
                out.push_str(" - ");
                out.push_str(&term[1..]);
                continue;
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        out.push_str(&format!(" + O({var}^{})", self.precision));
        out
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("z"))
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("z"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ser(start: i64, c: &[i64], t: i64) -> TruncatedSeries {
        TruncatedSeries::from_ints(start, c, t)
    }

    #[test]
    fn difference_of_squares() {
        let a = ser(0, &[1, 1], 8);
        let b = ser(0, &[1, -1], 8);
        let p = a.arith(&b, SeriesOp::Mul).unwrap();
        assert_eq!(p, ser(0, &[1, 0, -1], 8));
    }

    #[test]
    fn binomial_cube() {
        let a = ser(1, &[1, 1], 8);
        let c = a.arith(&a, SeriesOp::Pow(3)).unwrap();
        // precision 8 + 2·1 = 10 after two products of valuation-1 series
        assert_eq!(c.truncate(8), ser(3, &[1, 3, 3, 1], 8));
        assert!(c.precision() >= 8);
    }

    #[test]
    fn additive_identity() {
        let a = ser(2, &[3, 0, -5], 8);
        assert_eq!(TruncatedSeries::zero(8).add(&a), a);
    }

    #[test]
    fn zero_precision_product_is_an_error() {
        let unknown = TruncatedSeries::zero(0);
        let a = ser(0, &[1, 1], 8);
        assert!(matches!(
            unknown.arith(&a, SeriesOp::Mul),
            Err(SeriesError::PrecisionExhausted { precision: 0 })
        ));
    }

    #[test]
    fn unit_inversions() {
        let one_plus_u = ser(0, &[1, 1], 10);
        let inv = one_plus_u.invert_unit().unwrap();
        assert_eq!(inv, ser(0, &[1, -1, 1, -1, 1, -1, 1, -1, 1, -1], 10));
        let c = TruncatedSeries::constant(Coefficient::from_integer(4), 5);
        assert_eq!(c.invert_unit().unwrap(), TruncatedSeries::constant(Coefficient::from_ratio(1, 4), 5));
        let a = ser(0, &[2, 1, 1], 3);
        let inv = a.invert_unit().unwrap();
        let expected = TruncatedSeries::new(
            0,
            vec![
                Coefficient::from_ratio(1, 2),
                Coefficient::from_ratio(-1, 4),
                Coefficient::from_ratio(-1, 8),
            ],
            3,
        );
        assert_eq!(inv, expected);
        assert_eq!(a.mul(&inv), TruncatedSeries::one(3));
        assert!(matches!(ser(1, &[1], 4).truncate(1).invert_unit(), Err(SeriesError::NotAUnit)));
    }

    #[test]
    fn laurent_inverse_precision() {
        // z²(1 + z) + O(z^6) → z^-2 (1 − z + z² − z³) + O(z^2)
        let a = ser(2, &[1, 1], 6);
        let inv = a.invert().unwrap();
        assert_eq!(inv.valuation(), -2);
        assert_eq!(inv.precision(), 2);
        assert_eq!(a.mul(&inv), TruncatedSeries::one(4));
    }

    #[test]
    fn compositional_inverse_examples() {
        let id = TruncatedSeries::var(12);
        assert_eq!(id.compositional_inverse().unwrap(), id);
        let two_t = TruncatedSeries::monomial(Coefficient::from_integer(2), 1, 9);
        assert_eq!(
            two_t.compositional_inverse().unwrap(),
            TruncatedSeries::monomial(Coefficient::from_ratio(1, 2), 1, 9)
        );
        let g = ser(1, &[1, 1], 5);
        let h = g.compositional_inverse().unwrap();
        assert_eq!(h, ser(1, &[1, -1, 2, -5], 5));
        assert_eq!(g.compose(&h).unwrap().truncate(5), TruncatedSeries::var(5));
        assert_eq!(h.compose(&g).unwrap().truncate(5), TruncatedSeries::var(5));
        assert!(ser(2, &[1], 5).compositional_inverse().is_err());
    }

    #[test]
    fn residue_examples() {
        let phi = ser(3, &[1, 0, 1], 12);
        let parts = phi.residue_decompose(2);
        assert!(parts[0].is_zero());
        assert_eq!(parts[1], ser(1, &[1, 1], 6));
        let t = TruncatedSeries::var(9);
        let parts = t.residue_decompose(3);
        assert!(parts[0].is_zero() && parts[2].is_zero());
        assert_eq!(parts[1], TruncatedSeries::one(3));
        let phi = ser(2, &[1, 1], 10);
        let parts = phi.residue_decompose(2);
        assert_eq!(parts[0], ser(1, &[1], 5));
        assert_eq!(parts[1], ser(1, &[1], 5));
        assert_eq!(TruncatedSeries::reassemble(&parts), phi);
    }

    #[test]
    fn unit_root() {
        // (1 + z)^(1/2) squared
        let u = ser(0, &[1, 1], 10);
        let r = u.unit_power(&BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(r.mul(&r), u);
    }

    #[test]
    fn display_is_readable() {
        let s = ser(0, &[1, -1, 0, 2], 5);
        assert_eq!(s.display_with("u"), "1 - u + 2*u^3 + O(u^5)");
    }
}
