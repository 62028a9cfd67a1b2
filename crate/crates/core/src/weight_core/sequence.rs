//! Weight sequences with memoized values, and totally ordered matrices of them.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde_json::Value;

use crate::exact::{factorial, ln_factorial, rational_pow, Interval};

use super::family::{FamilyRegistry, SequenceFamily, TailBehavior};
use super::WeightError;

/// Past this index logs come from the closed form instead of the cache.
const LN_CACHE_LIMIT: u128 = 1 << 16;

#[derive(Default)]
struct Caches {
    radicand: RwLock<HashMap<u64, BigRational>>,
    m_radicand: RwLock<HashMap<u64, BigRational>>,
    ln_big_m: RwLock<HashMap<u128, Interval>>,
}

/// A positive sequence `M` backed by a registered family.
///
/// Values are exact radicands: `M_k = radicand(k)^(1/index)`. All caches are
/// behind locks, so a sequence can be shared freely across threads.
#[derive(Clone)]
pub struct WeightSequence {
    family: Arc<dyn SequenceFamily>,
    caches: Arc<Caches>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightSequence({})", self.family.spec())
    }
}

impl WeightSequence {
    pub fn new(family: Arc<dyn SequenceFamily>) -> Self {
        Self {
            family,
            caches: Arc::new(Caches::default()),
        }
    }

    /// Parses `name:params` with the default registry.
    pub fn parse(spec: &str) -> Result<Self, WeightError> {
        FamilyRegistry::default()
            .parse(spec)
            .map(Self::new)
            .map_err(WeightError::InvalidSpec)
    }

    /// A `{"kind": ...}` object, or a `name:params` string.
    pub fn from_json(v: &Value) -> Result<Self, WeightError> {
        if let Value::String(spec) = v {
            return Self::parse(spec);
        }
        FamilyRegistry::default()
            .from_json(v)
            .map(Self::new)
            .map_err(WeightError::InvalidSpec)
    }

    pub fn gevrey(s: &str) -> Self {
        Self::parse(&format!("gevrey:{s}")).expect("valid gevrey exponent")
    }

    pub fn family(&self) -> &dyn SequenceFamily {
        self.family.as_ref()
    }

    pub fn spec(&self) -> String {
        self.family.spec()
    }

    pub fn index(&self) -> u32 {
        self.family.root_index()
    }

    pub fn tail(&self) -> TailBehavior {
        self.family.tail()
    }

    pub fn horizon(&self) -> Option<u64> {
        self.family.horizon()
    }

    fn beyond(&self, k: u128) -> WeightError {
        WeightError::BeyondHorizon {
            k,
            horizon: self.horizon().unwrap_or(0),
        }
    }

    /// `M_k^index`.
    pub fn radicand(&self, k: u64) -> Result<BigRational, WeightError> {
        if let Some(v) = self.caches.radicand.read().expect("lock").get(&k) {
            return Ok(v.clone());
        }
        let v = self.family.radicand(k).ok_or_else(|| self.beyond(k as u128))?;
        self.caches.radicand.write().expect("lock").insert(k, v.clone());
        Ok(v)
    }

    /// `m_k^index = M_k^index / (k!)^index`.
    pub fn m_radicand(&self, k: u64) -> Result<BigRational, WeightError> {
        if let Some(v) = self.caches.m_radicand.read().expect("lock").get(&k) {
            return Ok(v.clone());
        }
        let f = BigRational::from_integer(num_traits::pow(factorial(k), self.index() as usize));
        let v = self.radicand(k)? / f;
        self.caches.m_radicand.write().expect("lock").insert(k, v.clone());
        Ok(v)
    }

    /// `(m_{k+1}/m_k)^index`, from the closed form when the family has one.
    pub fn ratio_radicand(&self, k: u128) -> Result<BigRational, WeightError> {
        if let Some(r) = self.family.ratio_radicand(k) {
            return Ok(r);
        }
        let k64 = u64::try_from(k).map_err(|_| self.beyond(k))?;
        Ok(self.m_radicand(k64 + 1)? / self.m_radicand(k64)?)
    }

    /// Enclosure of `ln M_k`.
    pub fn ln_big_m(&self, k: u128) -> Result<Interval, WeightError> {
        if k < LN_CACHE_LIMIT {
            if let Some(v) = self.caches.ln_big_m.read().expect("lock").get(&k) {
                return Ok(*v);
            }
        }
        let v = self.family.ln_value(k).ok_or_else(|| self.beyond(k))?;
        if k < LN_CACHE_LIMIT {
            self.caches.ln_big_m.write().expect("lock").insert(k, v);
        }
        Ok(v)
    }

    /// Enclosure of `ln m_k`.
    pub fn ln_m(&self, k: u128) -> Result<Interval, WeightError> {
        Ok(self.ln_big_m(k)? - ln_factorial(k))
    }

    /// `M_k` as text: `p/q`, or `(r)^(1/b)` for irrational values.
    pub fn value_string(&self, k: u64) -> Result<String, WeightError> {
        Ok(root_string(&self.radicand(k)?, self.index()))
    }

    /// `M_0 = 1 ≤ M_1`.
    pub fn is_normalized(&self) -> Result<bool, WeightError> {
        Ok(self.radicand(0)?.is_one() && self.radicand(1)? >= BigRational::one())
    }

    /// First `k ≤ horizon` with `M_k² > M_{k-1} M_{k+1}`, if any.
    pub fn log_convexity_violation(&self, horizon: u64) -> Result<Option<u64>, WeightError> {
        self.first_concavity(horizon, |k| self.radicand(k))
    }

    /// First `k ≤ horizon` with `m_k² > m_{k-1} m_{k+1}`, if any.
    pub fn m_log_convexity_violation(&self, horizon: u64) -> Result<Option<u64>, WeightError> {
        self.first_concavity(horizon, |k| self.m_radicand(k))
    }

    fn first_concavity(
        &self,
        horizon: u64,
        value: impl Fn(u64) -> Result<BigRational, WeightError>,
    ) -> Result<Option<u64>, WeightError> {
        let last = match self.horizon() {
            Some(h) => horizon.min(h.saturating_sub(2)),
            None => horizon,
        };
        for k in 1..=last {
            let (a, b, c) = (value(k - 1)?, value(k)?, value(k + 1)?);
            if &b * &b > a * c {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// `r^(1/b)` as text, collapsing to `p/q` when the root is rational.
pub fn root_string(r: &BigRational, b: u32) -> String {
    if b == 1 {
        return r.to_string();
    }
    let exact = |n: &num_bigint::BigInt| {
        let s = crate::exact::integer_root_floor(n, b);
        (num_traits::Pow::pow(&s, b) == *n).then_some(s)
    };
    match (exact(r.numer()), exact(r.denom())) {
        (Some(n), Some(d)) => BigRational::new(n, d).to_string(),
        _ => format!("({r})^(1/{b})"),
    }
}

/// `M^{(1)}_k ≤ M^{(2)}_k`, compared exactly through radicand powers.
fn value_le(a: &WeightSequence, b: &WeightSequence, k: u64) -> Result<bool, WeightError> {
    let (ra, rb) = (a.radicand(k)?, b.radicand(k)?);
    let (ia, ib) = (a.index() as u64, b.index() as u64);
    if ia == ib {
        return Ok(ra <= rb);
    }
    // cheap log screen before the exact powers
    let (la, lb) = (a.ln_big_m(k as u128)?, b.ln_big_m(k as u128)?);
    if la.hi < lb.lo {
        return Ok(true);
    }
    if la.lo > lb.hi {
        return Ok(false);
    }
    Ok(rational_pow(&ra, ib) <= rational_pow(&rb, ia))
}

/// A finite weight matrix, ordered increasingly by the pointwise order.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    pub sequences: Vec<WeightSequence>,
    /// Indices `0..=order_horizon` over which the order was verified.
    pub order_horizon: u64,
}

impl WeightMatrix {
    /// Checks `M^{(i)}_k ≤ M^{(i+1)}_k` for all `k ≤ horizon`.
    pub fn new(sequences: Vec<WeightSequence>, horizon: u64) -> Result<Self, WeightError> {
        if sequences.is_empty() {
            return Err(WeightError::InvalidSpec("weight matrix is empty".into()));
        }
        let mut horizon = horizon;
        for s in &sequences {
            if let Some(h) = s.horizon() {
                horizon = horizon.min(h.saturating_sub(1));
            }
        }
        for (i, pair) in sequences.windows(2).enumerate() {
            for k in 0..=horizon {
                if !value_le(&pair[0], &pair[1], k)? {
                    return Err(WeightError::NotOrdered { index: i, k });
                }
            }
        }
        Ok(Self {
            sequences,
            order_horizon: horizon,
        })
    }

    pub fn singleton(seq: WeightSequence) -> Self {
        Self {
            sequences: vec![seq],
            order_horizon: 0,
        }
    }

    /// Parses `{"sequences": [...]}` or a single sequence object.
    pub fn from_json(v: &Value, horizon: u64) -> Result<Self, WeightError> {
        match v.get("sequences") {
            Some(Value::Array(list)) => {
                let seqs = list
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        WeightSequence::from_json(s).map_err(|e| {
                            WeightError::InvalidSpec(format!("sequences[{i}]: {}", e.detail()))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Self::new(seqs, horizon)
            }
            Some(_) => Err(WeightError::InvalidSpec("sequences: expected a list".into())),
            None => Ok(Self::singleton(WeightSequence::from_json(v)?)),
        }
    }

    pub fn specs(&self) -> Vec<String> {
        self.sequences.iter().map(WeightSequence::spec).collect()
    }
}

/// f64 view of an exact rational for reporting only.
pub fn approx(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gevrey_is_a_weight_sequence() {
        let g = WeightSequence::gevrey("2");
        assert!(g.is_normalized().unwrap());
        assert_eq!(g.log_convexity_violation(50).unwrap(), None);
        assert_eq!(g.m_log_convexity_violation(50).unwrap(), None);
        assert_eq!(g.value_string(3).unwrap(), "36");
        assert_eq!(WeightSequence::gevrey("3/2").value_string(3).unwrap(), "(216)^(1/2)");
    }

    #[test]
    fn table_concavity_is_found() {
        let t = WeightSequence::parse("table:1,2,3,10").unwrap();
        assert_eq!(t.log_convexity_violation(10).unwrap(), Some(1));
    }

    #[test]
    fn matrix_order() {
        let seqs = vec![WeightSequence::gevrey("2"), WeightSequence::gevrey("5/2"), WeightSequence::gevrey("3")];
        assert!(WeightMatrix::new(seqs.clone(), 40).is_ok());
        let rev: Vec<_> = seqs.into_iter().rev().collect();
        assert!(matches!(WeightMatrix::new(rev, 40), Err(WeightError::NotOrdered { index: 0, k: 2 })));
    }

    #[test]
    fn ln_values_enclose_exact_ones() {
        let g = WeightSequence::gevrey("5/2");
        for k in [1u64, 7, 30, 200] {
            let exact = crate::exact::ln_rational(&g.radicand(k).unwrap()).scale(0.5);
            assert!(g.ln_big_m(k as u128).unwrap().overlaps(&exact), "k={k}");
        }
    }
}
