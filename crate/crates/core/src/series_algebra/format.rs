//! Text formats: series expressions, germ files and identity certificates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::exact::{Coefficient, Field};

use super::identity::{AttemptRecord, JorisIdentity, SearchTrace};
use super::TruncatedSeries;

/// Parses a polynomial such as `t^3+t^5`, `3/2*t^4 - t` or `(1+i)*t^2`.
pub fn parse_phi(expr: &str, var: char, precision: i64) -> Result<TruncatedSeries, String> {
    Ok(TruncatedSeries::from_terms(parse_terms(expr, var)?, precision))
}

/// The `(exponent, coefficient)` terms of a polynomial expression.
pub fn parse_terms(expr: &str, var: char) -> Result<Vec<(i64, Coefficient)>, String> {
    let src: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err("empty expression".into());
    }
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    let bytes: Vec<char> = src.chars().collect();
    for (i, &ch) in bytes.iter().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && i > start && bytes[i - 1] != '^' && bytes[i - 1] != '*' => {
                terms.push(bytes[start..i].iter().collect::<String>());
                start = i;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced `)` in `{expr}`"));
        }
    }
    if depth != 0 {
        return Err(format!("unbalanced `(` in `{expr}`"));
    }
    terms.push(bytes[start..].iter().collect());

    let mut parsed = Vec::new();
    for raw in terms {
        let (neg, body) = match raw.strip_prefix('-') {
            Some(b) => (true, b.to_string()),
            None => (false, raw.strip_prefix('+').unwrap_or(&raw).to_string()),
        };
        if body.is_empty() {
            return Err(format!("dangling sign in `{expr}`"));
        }
        let (coef_part, exp) = split_monomial(&body, var)?;
        let mut c = if coef_part.is_empty() {
            Coefficient::from_integer(1)
        } else {
            let inner = coef_part
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .unwrap_or(&coef_part);
            inner
                .parse::<Coefficient>()
                .map_err(|e| format!("term `{raw}`: {e}"))?
        };
        if neg {
            c = -c;
        }
        parsed.push((exp, c));
    }
    Ok(parsed)
}

fn split_monomial(body: &str, var: char) -> Result<(String, i64), String> {
    let mut depth = 0;
    let mut pos = None;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == var && depth == 0 => {
                pos = Some(i);
                break;
            }
            _ => {}
        }
    }
    let Some(i) = pos else {
        return Ok((body.to_string(), 0));
    };
    let coef = body[..i].trim_end_matches('*').to_string();
    let rest = &body[i + var.len_utf8()..];
    let exp = if rest.is_empty() {
        1
    } else if let Some(e) = rest.strip_prefix('^') {
        e.trim_matches(|c| c == '(' || c == ')')
            .parse::<i64>()
            .map_err(|_| format!("bad exponent `{e}`"))?
    } else {
        return Err(format!("unexpected `{rest}` after `{var}`"));
    };
    if exp < 0 {
        return Err(format!("negative exponent in `{body}`"));
    }
    Ok((coef, exp))
}

/// A germ definition file.
///
/// Components are dense coefficient lists (index = exponent), sparse
/// `{exponent: "p/q"}` maps, or expression strings in `t`.
#[derive(Clone, Debug, Deserialize)]
pub struct GermFile {
    #[serde(default)]
    pub field: Option<Field>,
    #[serde(default)]
    pub order: Option<i64>,
    pub components: Vec<Value>,
    /// Components are truncations of longer series rather than polynomials.
    #[serde(default)]
    pub truncated: bool,
}

impl GermFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("germ file: {e}"))
    }

    /// Highest exponent mentioned by any component.
    pub fn max_exponent(&self) -> Result<i64, String> {
        Ok(self
            .component_terms()?
            .iter()
            .flatten()
            .filter(|(_, c)| !num_traits::Zero::is_zero(c))
            .map(|(e, _)| *e)
            .max()
            .unwrap_or(0))
    }

    /// Components as series known to `O(t^precision)`.
    pub fn components_at(&self, precision: i64) -> Result<Vec<TruncatedSeries>, String> {
        Ok(self
            .component_terms()?
            .into_iter()
            .map(|terms| {
                let terms = terms.into_iter().filter(|(e, _)| *e < precision);
                TruncatedSeries::from_terms(terms, precision)
            })
            .collect())
    }

    fn component_terms(&self) -> Result<Vec<Vec<(i64, Coefficient)>>, String> {
        let mut out = Vec::new();
        for (idx, v) in self.components.iter().enumerate() {
            let at = |what: String| format!("components[{idx}]: {what}");
            let terms: Vec<(i64, Coefficient)> = match v {
                Value::Array(list) => list
                    .iter()
                    .enumerate()
                    .map(|(e, x)| Ok((e as i64, value_coefficient(x).map_err(|m| at(format!("[{e}] {m}")))?)))
                    .collect::<Result<_, String>>()?,
                Value::Object(map) => map
                    .iter()
                    .map(|(k, x)| {
                        let e: i64 = k.trim().parse().map_err(|_| at(format!("bad exponent key `{k}`")))?;
                        if e < 0 {
                            return Err(at(format!("negative exponent `{k}`")));
                        }
                        Ok((e, value_coefficient(x).map_err(|m| at(format!("[{k}] {m}")))?))
                    })
                    .collect::<Result<_, String>>()?,
                Value::String(s) => parse_terms(s, 't').map_err(at)?,
                other => return Err(at(format!("expected list, map or expression, found {other}"))),
            };
            if let Some(f) = self.field {
                if let Some((e, c)) = terms.iter().find(|(_, c)| !f.admits(c)) {
                    return Err(at(format!("coefficient {c} at exponent {e} is not in {f}")));
                }
            }
            out.push(terms);
        }
        if out.is_empty() {
            return Err("components: empty list".into());
        }
        Ok(out)
    }
}

fn value_coefficient(v: &Value) -> Result<Coefficient, String> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) if n.is_i64() => Ok(Coefficient::from_integer(n.as_i64().expect("i64"))),
        Value::Number(n) => Err(format!("non-integer number {n}; write rationals as \"p/q\" strings")),
        other => Err(format!("expected coefficient, found {other}")),
    }
}

/// A series as `{precision, terms: {exponent: coefficient}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SparseSeries {
    pub precision: i64,
    pub terms: BTreeMap<i64, Coefficient>,
}

impl From<&TruncatedSeries> for SparseSeries {
    fn from(s: &TruncatedSeries) -> Self {
        Self {
            precision: s.precision(),
            terms: s.terms().map(|(e, c)| (e, c.clone())).collect(),
        }
    }
}

impl From<&SparseSeries> for TruncatedSeries {
    fn from(s: &SparseSeries) -> Self {
        TruncatedSeries::from_terms(s.terms.iter().map(|(e, c)| (*e, c.clone())), s.precision)
    }
}

/// Serialized form of a [`JorisIdentity`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityCertificate {
    pub p: i64,
    pub q: i64,
    pub field: Field,
    pub cert_order: i64,
    pub residual_valuation: i64,
    pub certified: bool,
    pub c: Coefficient,
    #[serde(rename = "H1")]
    pub h1: SparseSeries,
    #[serde(rename = "A")]
    pub a: Vec<SparseSeries>,
    pub alphas: Vec<SparseSeries>,
    pub trace: CertificateTrace,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateTrace {
    pub k_range: usize,
    pub basis_vector_index: usize,
    pub working_precision: i64,
    pub attempts: Vec<String>,
}

impl From<&JorisIdentity> for IdentityCertificate {
    fn from(id: &JorisIdentity) -> Self {
        Self {
            p: id.p,
            q: id.q,
            field: id.field,
            cert_order: id.cert_order,
            residual_valuation: id.residual_valuation,
            certified: id.certified,
            c: id.c.clone(),
            h1: (&id.h1).into(),
            a: id.a.iter().map(Into::into).collect(),
            alphas: id.alphas.iter().map(Into::into).collect(),
            trace: CertificateTrace {
                k_range: id.trace.k_range,
                basis_vector_index: id.trace.basis_vector_index,
                working_precision: id.trace.working_precision,
                attempts: id
                    .trace
                    .attempts
                    .iter()
                    .map(|a| format!("W={} k={} dim={}: {}", a.working_precision, a.k_range, a.nullspace_dim, a.outcome))
                    .collect(),
            },
        }
    }
}

impl IdentityCertificate {
    pub fn to_identity(&self) -> JorisIdentity {
        JorisIdentity {
            p: self.p,
            q: self.q,
            field: self.field,
            alphas: self.alphas.iter().map(Into::into).collect(),
            a: self.a.iter().map(Into::into).collect(),
            c: self.c.clone(),
            h1: (&self.h1).into(),
            cert_order: self.cert_order,
            residual_valuation: self.residual_valuation,
            certified: self.certified,
            trace: SearchTrace {
                k_range: self.trace.k_range,
                basis_vector_index: self.trace.basis_vector_index,
                working_precision: self.trace.working_precision,
                attempts: Vec::<AttemptRecord>::new(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        let s = parse_phi("t^3+t^5", 't', 10).unwrap();
        assert_eq!(s, TruncatedSeries::from_ints(3, &[1, 0, 1], 10));
        let s = parse_phi("3/2*t^4 - t + (1+i)*t^2", 't', 6).unwrap();
        assert_eq!(s.coeff(1).unwrap(), Coefficient::from_integer(-1));
        assert_eq!(s.coeff(2).unwrap(), "1+i".parse().unwrap());
        assert_eq!(s.coeff(4).unwrap(), Coefficient::from_ratio(3, 2));
        assert!(parse_phi("t^", 't', 5).is_err());
        assert!(parse_phi("x^2", 't', 5).is_err());
    }

    #[test]
    fn germ_file_forms() {
        let f = GermFile::parse(r#"{"field":"Q","components":[[0,0,1],{"3":"1","5":"-1/2"},"t^7"]}"#).unwrap();
        let comps = f.components_at(8).unwrap();
        assert_eq!(comps[0], TruncatedSeries::from_ints(2, &[1], 8));
        assert_eq!(comps[1].coeff(5).unwrap(), Coefficient::from_ratio(-1, 2));
        assert_eq!(comps[2].support(), vec![7]);
        assert_eq!(f.max_exponent().unwrap(), 7);
        let bad = GermFile::parse(r#"{"field":"Q","components":[{"2":"i"}]}"#).unwrap();
        assert!(bad.components_at(8).unwrap_err().contains("components[0]"));
    }
}
