//! Closed-form sequence families behind a common trait, looked up by name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::exact::{
    factorial, ln_factorial, ln_rational, parse_rational, rational_interval, rational_pow, Interval,
};

/// What is known about `m_{k+1}/m_k` beyond the materialized values.
#[derive(Clone, Debug, PartialEq)]
pub enum TailBehavior {
    /// The ratio is nondecreasing for `k ≥ k0` and unbounded.
    MonotoneUnbounded { k0: u64 },
    /// The ratio is nondecreasing for `k ≥ k0` with supremum `sup_ratio`.
    MonotoneBounded { k0: u64, sup_ratio: BigRational },
    /// Nothing is known (raw tables).
    Unknown,
}

/// A family of positive sequences `M_k = radicand(k)^(1/root_index)`.
pub trait SequenceFamily: Send + Sync + fmt::Debug {
    /// Registry name, e.g. `gevrey`.
    fn kind(&self) -> &'static str;
    /// Canonical `name:params` form accepted by the registry.
    fn spec(&self) -> String;
    fn parameters(&self) -> Value;
    fn root_index(&self) -> u32;
    /// `M_k^root_index`; `None` past the last known index.
    fn radicand(&self, k: u64) -> Option<BigRational>;
    /// `(m_{k+1}/m_k)^root_index` in closed form, usable for huge `k`.
    fn ratio_radicand(&self, _k: u128) -> Option<BigRational> {
        None
    }
    /// Enclosure of `ln M_k`.
    fn ln_value(&self, k: u128) -> Option<Interval>;
    fn tail(&self) -> TailBehavior;
    /// Number of stored values for table-backed families.
    fn horizon(&self) -> Option<u64> {
        None
    }
}

fn rational_scale(iv: Interval, r: &BigRational) -> Interval {
    if r.is_zero() {
        return Interval::zero();
    }
    match r.to_f64() {
        Some(x) if BigRational::from_float(x).as_ref() == Some(r) => iv.scale(x),
        _ => iv * rational_interval(r),
    }
}

/// `M_k = (k!)^s` for rational `s ≥ 1`.
#[derive(Debug, Clone)]
pub struct Gevrey {
    s: BigRational,
}

impl Gevrey {
    pub fn new(s: BigRational) -> Result<Self, String> {
        if s < BigRational::one() {
            return Err(format!("gevrey exponent must be ≥ 1, got {s}"));
        }
        Ok(Self { s })
    }

    pub fn exponent(&self) -> &BigRational {
        &self.s
    }

    fn a_b(&self) -> (u32, u32) {
        let a = self.s.numer().to_u32().expect("small numerator");
        let b = self.s.denom().to_u32().expect("small denominator");
        (a, b)
    }
}

impl SequenceFamily for Gevrey {
    fn kind(&self) -> &'static str {
        "gevrey"
    }

    fn spec(&self) -> String {
        format!("gevrey:{}", self.s)
    }

    fn parameters(&self) -> Value {
        json!({ "s": self.s.to_string() })
    }

    fn root_index(&self) -> u32 {
        self.a_b().1
    }

    fn radicand(&self, k: u64) -> Option<BigRational> {
        let (a, _) = self.a_b();
        Some(BigRational::from_integer(num_traits::pow(factorial(k), a as usize)))
    }

    fn ratio_radicand(&self, k: u128) -> Option<BigRational> {
        let (a, b) = self.a_b();
        let base = BigInt::from(k) + 1;
        Some(BigRational::from_integer(num_traits::pow(base, (a - b) as usize)))
    }

    fn ln_value(&self, k: u128) -> Option<Interval> {
        Some(rational_scale(ln_factorial(k), &self.s))
    }

    fn tail(&self) -> TailBehavior {
        if self.s.is_one() {
            TailBehavior::MonotoneBounded {
                k0: 0,
                sup_ratio: BigRational::one(),
            }
        } else {
            TailBehavior::MonotoneUnbounded { k0: 0 }
        }
    }
}

/// `M_k = c^k · B_k` for a base family `B` and rational `c > 0`.
#[derive(Debug, Clone)]
pub struct Scaled {
    base: Arc<dyn SequenceFamily>,
    factor: BigRational,
}

impl Scaled {
    pub fn new(base: Arc<dyn SequenceFamily>, factor: BigRational) -> Result<Self, String> {
        if !factor.is_positive() {
            return Err(format!("scale factor must be positive, got {factor}"));
        }
        Ok(Self { base, factor })
    }
}

impl SequenceFamily for Scaled {
    fn kind(&self) -> &'static str {
        "scaled"
    }

    fn spec(&self) -> String {
        format!("scaled:{}:{}", self.factor, self.base.spec())
    }

    fn parameters(&self) -> Value {
        json!({
            "factor": self.factor.to_string(),
            "base": { "kind": self.base.kind(), "parameters": self.base.parameters() },
        })
    }

    fn root_index(&self) -> u32 {
        self.base.root_index()
    }

    fn radicand(&self, k: u64) -> Option<BigRational> {
        let b = self.root_index() as u64;
        Some(rational_pow(&self.factor, k * b) * self.base.radicand(k)?)
    }

    fn ratio_radicand(&self, k: u128) -> Option<BigRational> {
        let b = self.root_index() as u64;
        Some(rational_pow(&self.factor, b) * self.base.ratio_radicand(k)?)
    }

    fn ln_value(&self, k: u128) -> Option<Interval> {
        let lc = ln_rational(&self.factor);
        Some(self.base.ln_value(k)? + lc * Interval::from_u128(k))
    }

    fn tail(&self) -> TailBehavior {
        match self.base.tail() {
            TailBehavior::MonotoneBounded { k0, sup_ratio } => TailBehavior::MonotoneBounded {
                k0,
                sup_ratio: sup_ratio * &self.factor,
            },
            other => other,
        }
    }

    fn horizon(&self) -> Option<u64> {
        self.base.horizon()
    }
}

/// `M_k = b^{k²}` for rational `b > 1`: log-convex but without moderate growth.
#[derive(Debug, Clone)]
pub struct SquareExponential {
    b: BigRational,
}

impl SquareExponential {
    pub fn new(b: BigRational) -> Result<Self, String> {
        if b <= BigRational::one() {
            return Err(format!("sqexp base must exceed 1, got {b}"));
        }
        Ok(Self { b })
    }
}

impl SequenceFamily for SquareExponential {
    fn kind(&self) -> &'static str {
        "sqexp"
    }

    fn spec(&self) -> String {
        format!("sqexp:{}", self.b)
    }

    fn parameters(&self) -> Value {
        json!({ "b": self.b.to_string() })
    }

    fn root_index(&self) -> u32 {
        1
    }

    fn radicand(&self, k: u64) -> Option<BigRational> {
        Some(rational_pow(&self.b, k.checked_mul(k)?))
    }

    fn ratio_radicand(&self, k: u128) -> Option<BigRational> {
        // b^{2k+1}/(k+1)
        let e = u64::try_from(2 * k + 1).ok()?;
        if e > 1 << 24 {
            return None;
        }
        Some(rational_pow(&self.b, e) / BigRational::from_integer(BigInt::from(k) + 1))
    }

    fn ln_value(&self, k: u128) -> Option<Interval> {
        let kk = Interval::from_u128(k);
        Some(ln_rational(&self.b) * (kk * kk))
    }

    fn tail(&self) -> TailBehavior {
        // consecutive ratios grow by b²(k+1)/(k+2), which is ≥ 1 once
        // k ≥ (2 − b²)/(b² − 1)
        let b2 = &self.b * &self.b;
        let bound = (BigRational::from_integer(2.into()) - &b2) / (&b2 - BigRational::one());
        let k0 = if bound.is_positive() {
            bound.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
        } else {
            0
        };
        TailBehavior::MonotoneUnbounded { k0 }
    }
}

/// An explicit list `M_0, …, M_{n-1}`.
#[derive(Debug, Clone)]
pub struct Table {
    values: Vec<BigRational>,
    /// The caller asserts that `m` stays log-convex with unbounded ratios
    /// past the table.
    assume_log_convex: bool,
}

impl Table {
    pub fn new(values: Vec<BigRational>, assume_log_convex: bool) -> Result<Self, String> {
        if values.is_empty() {
            return Err("table is empty".into());
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_positive()) {
            return Err(format!("table entry M_{k} = {v} is not positive"));
        }
        Ok(Self {
            values,
            assume_log_convex,
        })
    }
}

impl SequenceFamily for Table {
    fn kind(&self) -> &'static str {
        "table"
    }

    fn spec(&self) -> String {
        let body: Vec<String> = self.values.iter().map(ToString::to_string).collect();
        format!("table:{}", body.join(","))
    }

    fn parameters(&self) -> Value {
        json!({
            "table": self.values.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "assume_log_convex": self.assume_log_convex,
        })
    }

    fn root_index(&self) -> u32 {
        1
    }

    fn radicand(&self, k: u64) -> Option<BigRational> {
        self.values.get(usize::try_from(k).ok()?).cloned()
    }

    fn ln_value(&self, k: u128) -> Option<Interval> {
        self.values.get(usize::try_from(k).ok()?).map(ln_rational)
    }

    fn tail(&self) -> TailBehavior {
        if self.assume_log_convex {
            TailBehavior::MonotoneUnbounded { k0: 0 }
        } else {
            TailBehavior::Unknown
        }
    }

    fn horizon(&self) -> Option<u64> {
        Some(self.values.len() as u64)
    }
}

type Builder = fn(&str, &FamilyRegistry) -> Result<Arc<dyn SequenceFamily>, String>;

/// Name → constructor map for sequence families.
pub struct FamilyRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut r = Self {
            builders: BTreeMap::new(),
        };
        r.register("gevrey", |p, _| {
            Ok(Arc::new(Gevrey::new(parse_rational(p)?)?))
        });
        r.register("sqexp", |p, _| {
            let b = if p.trim().is_empty() { "2" } else { p };
            Ok(Arc::new(SquareExponential::new(parse_rational(b)?)?))
        });
        r.register("scaled", |p, reg| {
            let (factor, base) = p
                .split_once(':')
                .ok_or_else(|| format!("scaled needs `factor:base`, got `{p}`"))?;
            Ok(Arc::new(Scaled::new(reg.parse(base)?, parse_rational(factor)?)?))
        });
        r.register("table", |p, _| {
            let (body, assume) = match p.strip_suffix(";log-convex") {
                Some(b) => (b, true),
                None => (p, false),
            };
            let values = body
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Arc::new(Table::new(values, assume)?))
        });
        r
    }
}

impl FamilyRegistry {
    pub fn register(&mut self, name: &'static str, builder: Builder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    /// Parses `name:params`, e.g. `gevrey:5/2` or `scaled:2:gevrey:2`.
    pub fn parse(&self, spec: &str) -> Result<Arc<dyn SequenceFamily>, String> {
        let spec = spec.trim();
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        let builder = self.builders.get(name).ok_or_else(|| {
            format!("unknown family `{name}` (known: {})", self.names().join(", "))
        })?;
        builder(params, self)
    }

    /// Builds a family from `{kind, parameters, table}` JSON.
    pub fn from_json(&self, v: &Value) -> Result<Arc<dyn SequenceFamily>, String> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or("missing string field `kind`")?;
        let params = v.get("parameters").cloned().unwrap_or(Value::Null);
        let param = |key: &str| -> Result<String, String> {
            match params.get(key) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                Some(other) => Err(format!("parameters.{key}: expected \"p/q\", found {other}")),
                None => Err(format!("parameters.{key}: missing")),
            }
        };
        match kind {
            "gevrey" => Ok(Arc::new(Gevrey::new(
                parse_rational(&param("s")?).map_err(|e| format!("parameters.s: {e}"))?,
            )?)),
            "sqexp" => Ok(Arc::new(SquareExponential::new(
                parse_rational(&param("b")?).map_err(|e| format!("parameters.b: {e}"))?,
            )?)),
            "scaled" => {
                let base = params.get("base").ok_or("parameters.base: missing")?;
                let base = self.from_json(base).map_err(|e| format!("parameters.base: {e}"))?;
                let factor = parse_rational(&param("factor")?).map_err(|e| format!("parameters.factor: {e}"))?;
                Ok(Arc::new(Scaled::new(base, factor)?))
            }
            "table" => {
                let table = v
                    .get("table")
                    .or_else(|| params.get("table"))
                    .and_then(Value::as_array)
                    .ok_or("table: expected a list of \"p/q\" strings")?;
                let values = table
                    .iter()
                    .enumerate()
                    .map(|(i, x)| match x {
                        Value::String(s) => parse_rational(s).map_err(|e| format!("table[{i}]: {e}")),
                        Value::Number(n) => parse_rational(&n.to_string()).map_err(|e| format!("table[{i}]: {e}")),
                        other => Err(format!("table[{i}]: expected \"p/q\", found {other}")),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let assume = params
                    .get("assume_log_convex")
                    .and_then(Value::as_bool)
                    .unwrap_or(false);
                Ok(Arc::new(Table::new(values, assume)?))
            }
            other => match self.builders.get(other) {
                Some(b) => b(&param("spec").unwrap_or_default(), self),
                None => Err(format!("kind: unknown family `{other}`")),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trips_specs() {
        let reg = FamilyRegistry::default();
        for s in ["gevrey:5/2", "sqexp:2", "scaled:3:gevrey:2", "table:1,1,2,6"] {
            assert_eq!(reg.parse(s).unwrap().spec(), s);
        }
        assert!(reg.parse("gevrey:1/2").is_err());
        assert!(reg.parse("nope:1").is_err());
    }

    #[test]
    fn gevrey_values() {
        let g = FamilyRegistry::default().parse("gevrey:3/2").unwrap();
        assert_eq!(g.root_index(), 2);
        assert_eq!(g.radicand(3).unwrap(), BigRational::from_integer(216.into()));
        assert_eq!(g.ratio_radicand(3).unwrap(), BigRational::from_integer(4.into()));
    }

    #[test]
    fn sqexp_tail_start() {
        let f = SquareExponential::new(BigRational::new(11.into(), 10.into())).unwrap();
        // b² = 1.21: (2 − 1.21)/0.21 ≈ 3.76
        assert_eq!(f.tail(), TailBehavior::MonotoneUnbounded { k0: 4 });
        let f = SquareExponential::new(BigRational::from_integer(2.into())).unwrap();
        assert_eq!(f.tail(), TailBehavior::MonotoneUnbounded { k0: 0 });
    }

    #[test]
    fn json_forms() {
        let reg = FamilyRegistry::default();
        let v: Value = serde_json::from_str(r#"{"kind":"gevrey","parameters":{"s":"5/2"}}"#).unwrap();
        assert_eq!(reg.from_json(&v).unwrap().spec(), "gevrey:5/2");
        let v: Value = serde_json::from_str(r#"{"kind":"table","table":["1","2","9/2"]}"#).unwrap();
        assert_eq!(reg.from_json(&v).unwrap().spec(), "table:1,2,9/2");
        let v: Value = serde_json::from_str(r#"{"kind":"table","table":["1","x"]}"#).unwrap();
        assert!(reg.from_json(&v).unwrap_err().starts_with("table[1]"));
    }
}
