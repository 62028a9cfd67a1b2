//! One-variable test functions with closed-form derivatives.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::exact::parse_rational;

use super::NumericError;

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction1D {
    /// `Σ c_i t^i` with exact coefficients.
    Polynomial(Vec<BigRational>),
    /// `Σ p_i(t) e^{λ_i t}`.
    ExpPoly(Vec<(Vec<f64>, f64)>),
    /// `c |t|^α`.
    AbsPower { alpha: BigRational, coef: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Finite(u32),
    Infinite,
}

impl Smoothness {
    pub fn admits(self, k: u32) -> bool {
        match self {
            Smoothness::Infinite => true,
            Smoothness::Finite(s) => k <= s,
        }
    }
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
}

fn poly_eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn falling(alpha: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, r| acc * (alpha - BigRational::from_integer(r.into())))
}

impl TestFunction1D {
    /// Parses `poly:c0,c1,...`, `exp`, `expm1` or `abs:α`.
    pub fn parse(spec: &str) -> Result<Self, NumericError> {
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        let bad = |m: String| NumericError::InvalidInput(format!("{spec}: {m}"));
        match name.trim() {
            "poly" => Ok(Self::Polynomial(
                params
                    .split(',')
                    .map(|c| parse_rational(c.trim()))
                    .collect::<Result<_, _>>()
                    .map_err(bad)?,
            )),
            "exp" => Ok(Self::ExpPoly(vec![(vec![1.0], 1.0)])),
            "expm1" => Ok(Self::ExpPoly(vec![(vec![1.0], 1.0), (vec![-1.0], 0.0)])),
            "abs" => {
                let alpha = parse_rational(params.trim()).map_err(bad)?;
                if !alpha.is_positive() {
                    return Err(bad("exponent must be positive".into()));
                }
                Ok(Self::AbsPower { alpha, coef: 1.0 })
            }
            other => Err(bad(format!("unknown test function `{other}` (poly, exp, expm1, abs)"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Polynomial(c) => {
                let cs: Vec<String> = c.iter().map(ToString::to_string).collect();
                format!("poly:{}", cs.join(","))
            }
            Self::ExpPoly(terms) => {
                let ts: Vec<String> = terms.iter().map(|(p, l)| format!("{p:?}·e^({l}t)")).collect();
                ts.join(" + ")
            }
            Self::AbsPower { alpha, coef } if *coef == 1.0 => format!("|t|^{alpha}"),
            Self::AbsPower { alpha, coef } => format!("{coef}·|t|^{alpha}"),
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            Self::AbsPower { alpha, .. } if alpha.is_integer() => {
                let n = alpha.to_integer().to_u32().unwrap_or(u32::MAX);
                if n % 2 == 0 {
                    Smoothness::Infinite
                } else {
                    Smoothness::Finite(n - 1)
                }
            }
            Self::AbsPower { alpha, .. } => Smoothness::Finite(alpha.floor().to_integer().to_u32().unwrap_or(0)),
            _ => Smoothness::Infinite,
        }
    }

    /// Points where derivatives past the smoothness order fail to exist.
    pub fn singular_points(&self) -> Vec<f64> {
        match self.smoothness() {
            Smoothness::Infinite => Vec::new(),
            Smoothness::Finite(_) => vec![0.0],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t).expect("order 0 is always available")
    }

    /// `f^{(k)}(t)`.
    pub fn derivative(&self, k: u32, t: f64) -> Result<f64, NumericError> {
        match self {
            Self::Polynomial(c) => {
                let d: Vec<f64> = c
                    .iter()
                    .enumerate()
                    .skip(k as usize)
                    .map(|(i, ci)| {
                        let f = falling(&BigRational::from_integer((i as u64).into()), k);
                        (ci * f).to_f64().unwrap_or(f64::NAN)
                    })
                    .collect();
                Ok(poly_eval(&d, t))
            }
            Self::ExpPoly(terms) => Ok(terms
                .iter()
                .map(|(p, l)| {
                    // (p e^{λt})' = (p' + λp) e^{λt}
                    let mut q = p.clone();
                    for _ in 0..k {
                        let dq = poly_derivative(&q);
                        q = q.iter().map(|c| c * l).collect();
                        for (i, c) in dq.into_iter().enumerate() {
                            q[i] += c;
                        }
                    }
                    poly_eval(&q, t) * (l * t).exp()
                })
                .sum()),
            Self::AbsPower { alpha, coef } => {
                if t == 0.0 {
                    let even = alpha.is_integer() && alpha.to_integer() % 2 == BigInt::zero();
                    let kq = BigRational::from_integer(k.into());
                    return if kq < *alpha {
                        Ok(0.0)
                    } else if even && kq == *alpha {
                        Ok(coef * falling(alpha, k).to_f64().unwrap_or(f64::NAN))
                    } else if even {
                        Ok(0.0)
                    } else {
                        Err(NumericError::DerivativeUnavailable { k, t })
                    };
                }
                let fall = falling(alpha, k).to_f64().unwrap_or(f64::NAN);
                let e = (alpha - BigRational::from_integer(k.into())).to_f64().unwrap_or(f64::NAN);
                let sign = if t < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                Ok(coef * fall * t.abs().powf(e) * sign)
            }
        }
    }

    /// `f^j`.
    pub fn power(&self, j: u32) -> Self {
        match self {
            Self::Polynomial(c) => {
                let mut acc = vec![BigRational::one()];
                for _ in 0..j {
                    let mut next = vec![BigRational::zero(); acc.len() + c.len() - 1];
                    for (a, x) in acc.iter().enumerate() {
                        for (b, y) in c.iter().enumerate() {
                            next[a + b] += x * y;
                        }
                    }
                    acc = next;
                }
                Self::Polynomial(acc)
            }
            Self::ExpPoly(terms) => {
                let mut acc: Vec<(Vec<f64>, f64)> = vec![(vec![1.0], 0.0)];
                for _ in 0..j {
                    let mut next: Vec<(Vec<f64>, f64)> = Vec::new();
                    for (p, l) in &acc {
                        for (q, m) in terms {
                            let prod = poly_mul(p, q);
                            let rate = l + m;
                            match next.iter_mut().find(|(_, r)| *r == rate) {
                                Some((s, _)) => {
                                    if s.len() < prod.len() {
                                        s.resize(prod.len(), 0.0);
                                    }
                                    s.iter_mut().zip(&prod).for_each(|(a, b)| *a += b);
                                }
                                None => next.push((prod, rate)),
                            }
                        }
                    }
                    acc = next;
                }
                Self::ExpPoly(acc)
            }
            Self::AbsPower { alpha, coef } => Self::AbsPower {
                alpha: alpha * BigRational::from_integer(j.into()),
                coef: coef.powi(j as i32),
            },
        }
    }

    /// Exact values at rational points, when the function allows it.
    pub fn eval_exact(&self, t: &BigRational) -> Option<BigRational> {
        match self {
            Self::Polynomial(c) => Some(c.iter().rev().fold(BigRational::zero(), |acc, ci| acc * t + ci)),
            Self::AbsPower { alpha, coef } if alpha.is_integer() && *coef == 1.0 => {
                let n = alpha.to_integer().to_usize()?;
                Some(num_traits::pow(t.abs(), n))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let e = TestFunction1D::parse("expm1").unwrap();
        assert_eq!(e.eval(0.0), 0.0);
        assert!((e.derivative(3, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let sq = e.power(2);
        // (e^t - 1)^2 = e^{2t} - 2e^t + 1, second derivative 4e^{2t} - 2e^t
        let t: f64 = 0.3;
        let want = 4.0 * (2.0 * t).exp() - 2.0 * t.exp();
        assert!((sq.derivative(2, t).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn absolute_powers() {
        let f = TestFunction1D::parse("abs:1").unwrap();
        assert_eq!(f.smoothness(), Smoothness::Finite(0));
        assert_eq!(f.power(2).smoothness(), Smoothness::Infinite);
        assert_eq!(f.power(3).smoothness(), Smoothness::Finite(2));
        assert_eq!(f.power(2).derivative(2, 0.0).unwrap(), 2.0);
        assert_eq!(f.power(3).derivative(2, -0.5).unwrap(), 3.0);
        assert!(f.power(3).derivative(3, 0.0).is_err());
        assert_eq!(f.power(3).derivative(3, -0.5).unwrap(), -6.0);
    }

    #[test]
    fn polynomial_powers() {
        let p = TestFunction1D::parse("poly:1,1").unwrap().power(3);
        assert_eq!(p.derivative(3, 0.7).unwrap(), 6.0);
        assert_eq!(p.eval_exact(&BigRational::from_integer(1.into())), Some(BigRational::from_integer(8.into())));
    }
}
