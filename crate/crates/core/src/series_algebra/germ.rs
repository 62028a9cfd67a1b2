//! Analytic germs `(t^p, φ)`: normalization, collapse and the support gcd.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::exact::{Coefficient, Field};

use super::{SeriesError, TruncatedSeries};

/// A germ normalized so that its first component is exactly `t^p`.
#[derive(Clone, Debug)]
pub struct AnalyticGerm {
    pub p: i64,
    pub phi: TruncatedSeries,
    /// Normalized components other than `t^p`, before collapse.
    pub extra_components: Vec<TruncatedSeries>,
    pub support: Vec<i64>,
    pub field: Field,
    pub precision: i64,
    /// Collapse coefficients applied to `extra_components` (empty when fewer
    /// than two extra components were given).
    pub gamma: Vec<i64>,
    origin: Origin,
}

#[derive(Clone, Debug)]
struct Origin {
    raw: Vec<TruncatedSeries>,
    /// Every raw component is a polynomial, so it may be extended with zeros.
    exact: bool,
    /// The normalized components are still polynomials (no reparametrization).
    polynomial: bool,
}

/// Whether a support gcd is final or only valid up to the truncation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GcdStatus {
    Certified,
    TentativeAtT,
}

struct Normalized {
    p: i64,
    components: Vec<TruncatedSeries>,
    reparametrized: bool,
}

fn validate(raw: &[TruncatedSeries]) -> Result<(), SeriesError> {
    if raw.iter().all(TruncatedSeries::is_zero) {
        return Err(SeriesError::InvalidGerm("all components vanish to precision".into()));
    }
    for (i, c) in raw.iter().enumerate() {
        if c.valuation() < 1 {
            return Err(SeriesError::InvalidGerm(format!(
                "component {i} does not vanish at 0 (valuation {})",
                c.valuation()
            )));
        }
    }
    Ok(())
}

/// Moves the component of minimal order first and reparametrizes so that it
/// becomes exactly `t^p`; the order of the others is kept.
fn normalize(raw: &[TruncatedSeries]) -> Result<Normalized, SeriesError> {
    validate(raw)?;
    let (lead_idx, lead) = raw
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .min_by_key(|(i, c)| (c.valuation(), *i))
        .expect("validated");
    let p = lead.valuation();
    let c = lead.leading_coefficient().expect("nonzero").clone();
    let c_inv = c.inv().expect("nonzero");
    let others: Vec<TruncatedSeries> = raw
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != lead_idx)
        .map(|(_, s)| s.clone())
        .collect();

    // Φ1 = c·t^p·U(t) with U(0) = 1
    let unit = lead.shift(-p).scale(&c_inv);
    let is_monomial = unit.terms().count() == 1;
    if is_monomial {
        let mut components = vec![TruncatedSeries::monomial(Coefficient::one(), p, lead.precision())];
        components.extend(others);
        return Ok(Normalized {
            p,
            components,
            reparametrized: false,
        });
    }
    // w = t·U^{1/p}, v = w⁻¹, then Φ_i ∘ v; the first becomes c·t^p
    let root = unit.unit_power(&BigRational::new(1.into(), p.into()))?;
    let w = root.shift(1);
    let v = w.compositional_inverse()?;
    let mut components = Vec::with_capacity(raw.len());
    let first = lead.compose(&v)?.scale(&c_inv);
    components.push(TruncatedSeries::monomial(Coefficient::one(), p, first.precision()));
    for s in &others {
        components.push(s.compose(&v)?);
    }
    Ok(Normalized {
        p,
        components,
        reparametrized: true,
    })
}

fn gcd_of(p: i64, series: &[&TruncatedSeries]) -> u64 {
    let mut g = p.unsigned_abs();
    for s in series {
        for e in s.support() {
            g = g.gcd(&e.unsigned_abs());
        }
    }
    g
}

/// γ tuples in search order: more nonzero entries first, then smaller
/// max |γ_i|, then lexicographic with positive values before negative ones.
/// Tuples whose first nonzero entry is negative are skipped (sign symmetry).
fn gamma_candidates(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let values: Vec<i64> = std::iter::once(0)
        .chain((1..=bound).flat_map(|k| [k, -k]))
        .collect();
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let g: Vec<i64> = idx.iter().map(|&i| values[i]).collect();
        if g.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0) {
            out.push(g);
        }
        let mut k = n;
        loop {
            if k == 0 {
                let rank = |g: &Vec<i64>| {
                    let nz = g.iter().filter(|&&x| x != 0).count();
                    let mx = g.iter().map(|x| x.abs()).max().unwrap_or(0);
                    let lex: Vec<(i64, bool)> = g.iter().map(|&x| (x.abs(), x < 0)).collect();
                    (std::cmp::Reverse(nz), mx, lex)
                };
                out.sort_by_key(|g| rank(g));
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < values.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn combine(components: &[TruncatedSeries], gamma: &[i64]) -> TruncatedSeries {
    components
        .iter()
        .zip(gamma)
        .filter(|(_, &g)| g != 0)
        .map(|(s, &g)| s.scale(&Coefficient::from_integer(g)))
        .reduce(|a, b| a.add(&b))
        .unwrap_or_else(|| TruncatedSeries::zero(components.iter().map(|c| c.precision()).min().unwrap_or(0)))
}

fn field_of(series: &[TruncatedSeries]) -> Field {
    series.iter().fold(Field::Rational, |f, s| f.join(s.field()))
}

/// Normalizes the raw components and collapses them to a two-component germ.
pub fn preprocess_germ(
    raw: &[TruncatedSeries],
    gamma_search_bound: i64,
) -> Result<AnalyticGerm, SeriesError> {
    let exact = false;
    build(raw, gamma_search_bound, exact, None)
}

impl AnalyticGerm {
    /// Germ from polynomial components (every coefficient beyond the stored
    /// ones is known to be zero).
    pub fn from_polynomials(raw: &[TruncatedSeries], gamma_search_bound: i64) -> Result<Self, SeriesError> {
        build(raw, gamma_search_bound, true, None)
    }

    /// The usual two-component germ `(t^p, φ)` for a polynomial `φ`.
    pub fn monomial_pair(p: i64, phi: TruncatedSeries) -> Result<Self, SeriesError> {
        let first = TruncatedSeries::monomial(Coefficient::one(), p, phi.precision());
        Self::from_polynomials(&[first, phi], 1)
    }

    /// Whether every raw component is a polynomial.
    pub fn is_exact(&self) -> bool {
        self.origin.exact
    }

    /// The raw components as given before normalization.
    pub fn raw_components(&self) -> &[TruncatedSeries] {
        &self.origin.raw
    }

    /// The same germ recomputed at another truncation order. Polynomial germs
    /// can be raised arbitrarily; truncated inputs cannot exceed their order.
    pub fn at_precision(&self, precision: i64) -> Result<Self, SeriesError> {
        let raw: Vec<TruncatedSeries> = if self.origin.exact {
            self.origin.raw.iter().map(|s| s.extend_exact(precision)).collect()
        } else {
            self.origin.raw.iter().map(|s| s.truncate(precision)).collect()
        };
        build(&raw, 0, self.origin.exact, Some(&self.gamma))
    }

    /// `φ` known to at least `precision` when the input allows it.
    pub fn phi_at(&self, precision: i64) -> Result<TruncatedSeries, SeriesError> {
        if precision <= self.phi.precision() {
            return Ok(self.phi.truncate(precision));
        }
        if !self.origin.exact {
            return Ok(self.phi.clone());
        }
        // normalization loses up to p orders; overshoot then cut back
        let mut extra = self.p + 1;
        loop {
            let g = self.at_precision(precision + extra)?;
            if g.phi.precision() >= precision {
                return Ok(g.phi.truncate(precision));
            }
            extra *= 2;
        }
    }

    /// All components of the normalized germ, `t^p` first.
    pub fn components(&self) -> Vec<TruncatedSeries> {
        let mut v = vec![TruncatedSeries::monomial(Coefficient::one(), self.p, self.precision)];
        if self.extra_components.is_empty() {
            v.push(self.phi.clone());
        } else {
            v.extend(self.extra_components.iter().cloned());
        }
        v
    }
}

fn build(
    raw: &[TruncatedSeries],
    bound: i64,
    exact: bool,
    fixed_gamma: Option<&[i64]>,
) -> Result<AnalyticGerm, SeriesError> {
    let norm = normalize(raw)?;
    let p = norm.p;
    let rest = &norm.components[1..];
    let field = field_of(&norm.components);
    let precision = norm.components.iter().map(|s| s.precision()).min().unwrap_or(0);
    let all_refs: Vec<&TruncatedSeries> = rest.iter().collect();
    let target = gcd_of(p, &all_refs);
    let support = {
        let mut s: Vec<i64> = std::iter::once(p)
            .chain(rest.iter().flat_map(|c| c.support()))
            .filter(|&e| e < precision)
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let origin = Origin {
        raw: raw.to_vec(),
        exact,
        polynomial: exact && !norm.reparametrized,
    };
    let (phi, gamma, extra) = match rest.len() {
        0 => (TruncatedSeries::zero(precision), Vec::new(), Vec::new()),
        1 => (rest[0].clone(), Vec::new(), Vec::new()),
        n => {
            let chosen = match fixed_gamma {
                Some(g) if g.len() == n => g.to_vec(),
                _ => {
                    let mut best = u64::MAX;
                    let mut found = None;
                    for g in gamma_candidates(n, bound) {
                        let phi = combine(rest, &g);
                        if phi.is_zero() {
                            continue;
                        }
                        let got = gcd_of(p, &[&phi]);
                        if got == target {
                            found = Some(g);
                            break;
                        }
                        best = best.min(got);
                    }
                    found.ok_or(SeriesError::CollapseFailed {
                        bound,
                        target,
                        best: if best == u64::MAX { p.unsigned_abs() } else { best },
                    })?
                }
            };
            (combine(rest, &chosen), chosen, rest.to_vec())
        }
    };
    Ok(AnalyticGerm {
        p,
        phi,
        extra_components: extra,
        support,
        field,
        precision,
        gamma,
        origin,
    })
}

/// gcd of `p` and every support exponent below the truncation order.
///
/// The value is certified when it is 1 (more terms can only lower it) or when
/// every component is a polynomial; otherwise it is tentative at `T`.
pub fn support_gcd(germ: &AnalyticGerm) -> (u64, GcdStatus) {
    let g = germ
        .support
        .iter()
        .fold(germ.p.unsigned_abs(), |g, &e| g.gcd(&e.unsigned_abs()));
    let status = if g == 1 || germ.origin.polynomial {
        GcdStatus::Certified
    } else {
        GcdStatus::TentativeAtT
    };
    (g, status)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(i64, i64)], t: i64) -> TruncatedSeries {
        TruncatedSeries::from_terms(terms.iter().map(|&(e, c)| (e, Coefficient::from_integer(c))), t)
    }

    #[test]
    fn gcd_examples() {
        let g = AnalyticGerm::from_polynomials(&[poly(&[(2, 1)], 32), poly(&[(3, 1)], 32)], 1).unwrap();
        assert_eq!(support_gcd(&g), (1, GcdStatus::Certified));
        let g = AnalyticGerm::from_polynomials(&[poly(&[(4, 1)], 32), poly(&[(6, 1)], 32)], 1).unwrap();
        assert_eq!(support_gcd(&g), (2, GcdStatus::Certified));
        let g = AnalyticGerm::from_polynomials(&[poly(&[(2, 1)], 32)], 1).unwrap();
        assert_eq!(support_gcd(&g), (2, GcdStatus::Certified));
        let g = preprocess_germ(&[poly(&[(4, 1)], 32), poly(&[(6, 1)], 32)], 1).unwrap();
        assert_eq!(support_gcd(&g), (2, GcdStatus::TentativeAtT));
    }

    #[test]
    fn already_normal_is_unchanged() {
        let g = preprocess_germ(&[poly(&[(3, 1)], 40), poly(&[(5, 1)], 40)], 1).unwrap();
        assert_eq!(g.p, 3);
        assert_eq!(g.phi, poly(&[(5, 1)], 40));
    }

    #[test]
    fn collapse_picks_all_ones() {
        let raw = [poly(&[(2, 1)], 32), poly(&[(3, 1)], 32), poly(&[(7, 1)], 32)];
        let g = preprocess_germ(&raw, 1).unwrap();
        assert_eq!(g.gamma, vec![1, 1]);
        assert_eq!(g.phi, poly(&[(3, 1), (7, 1)], 32));
        assert_eq!(support_gcd(&g).0, 1);
    }

    #[test]
    fn collapse_keeps_a_nontrivial_gcd() {
        let raw = [poly(&[(6, 1)], 48), poly(&[(9, 1)], 48), poly(&[(15, 1)], 48)];
        let g = AnalyticGerm::from_polynomials(&raw, 1).unwrap();
        assert_eq!(support_gcd(&g), (3, GcdStatus::Certified));
    }

    #[test]
    fn collapse_can_fail() {
        let raw = [poly(&[(2, 1)], 32), poly(&[(3, 1)], 32), poly(&[(4, 1)], 32)];
        let err = preprocess_germ(&raw, 0).unwrap_err();
        assert_eq!(err, SeriesError::CollapseFailed { bound: 0, target: 1, best: 2 });
    }

    #[test]
    fn normalization_recomposes() {
        // (t² + t³, t³): first becomes t², the reparametrization undoes itself
        let raw = [poly(&[(2, 1), (3, 1)], 24), poly(&[(3, 1)], 24)];
        let g = preprocess_germ(&raw, 1).unwrap();
        assert_eq!(g.p, 2);
        let unit = raw[0].shift(-2);
        let w = unit.unit_power(&BigRational::new(1.into(), 2.into())).unwrap().shift(1);
        // φ ∘ w = t³ and w² = t² + t³
        let back = g.phi.compose(&w).unwrap();
        let prec = back.precision().min(raw[1].precision());
        assert!(prec >= 20);
        assert_eq!(back.truncate(prec), raw[1].truncate(prec));
        assert_eq!(w.mul(&w).truncate(prec), raw[0].truncate(prec));
    }
}
