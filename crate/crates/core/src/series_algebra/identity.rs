//! Construction and independent verification of Joris identities
//! `t^{1+pq} = Σ_{j<p} α_j(t^p) φ(t)^j`.

use serde::Serialize;

use crate::exact::{ceil_div, Coefficient, Field};

use super::germ::{support_gcd, AnalyticGerm};
use super::nullspace::nullspace_over_laurent;
use super::{SeriesError, TruncatedSeries};

/// Bounds for the identity search.
#[derive(Clone, Debug)]
pub struct IdentitySearch {
    /// How many nullspace basis vectors are tried per system.
    pub max_nullspace_vectors: usize,
    /// Largest `k` in `G_{kj} = S^j x^{kp}`; `None` means `(p-1)²`.
    pub k_range_max: Option<usize>,
    /// Working-precision doublings before giving up.
    pub max_attempts: u32,
}

impl Default for IdentitySearch {
    fn default() -> Self {
        Self {
            max_nullspace_vectors: 8,
            k_range_max: None,
            max_attempts: 5,
        }
    }
}

/// One system solved during the search.
#[derive(Clone, Debug, Serialize)]
pub struct AttemptRecord {
    pub working_precision: i64,
    pub k_range: usize,
    pub nullspace_dim: usize,
    pub outcome: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchTrace {
    /// `k_range` of the system that produced the identity.
    pub k_range: usize,
    pub basis_vector_index: usize,
    pub working_precision: i64,
    pub attempts: Vec<AttemptRecord>,
}

#[derive(Clone, Debug)]
pub struct JorisIdentity {
    pub p: i64,
    pub q: i64,
    pub field: Field,
    /// `α_0 … α_{p-1}` in `u = t^p`, truncated to `O(u^⌈T/p⌉)`.
    pub alphas: Vec<TruncatedSeries>,
    /// `A_0 … A_{p-1}` after clearing, so that `Σ A_j φ^j = t·H(t^p)`.
    pub a: Vec<TruncatedSeries>,
    pub c: Coefficient,
    pub h1: TruncatedSeries,
    pub cert_order: i64,
    pub residual_valuation: i64,
    pub certified: bool,
    pub trace: SearchTrace,
}

/// Outcome of recomputing `Σ α_j(t^p) φ^j − t^{1+pq}`.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub cert_order: i64,
    /// Valuation of the residual; equals `precision` when it vanishes to
    /// its known precision.
    pub residual_valuation: i64,
    pub precision: i64,
    pub first_nonzero: Option<(i64, Coefficient)>,
    pub certified: bool,
}

/// Recomputes the residual of `id` on `germ` from scratch; no construction
/// state is reused.
pub fn verify_identity(id: &JorisIdentity, germ: &AnalyticGerm, order: i64) -> ResidualReport {
    let p = id.p;
    let phi = germ.phi_at(order).unwrap_or_else(|_| germ.phi.clone());
    let alpha_prec = id.alphas.iter().map(|a| a.precision() * p).min().unwrap_or(0);
    let cap = alpha_prec.max(phi.precision()) + 1 + p * id.q;
    let mut residual = TruncatedSeries::monomial(-Coefficient::from_integer(1), 1 + p * id.q, cap);
    let mut phi_pow: Option<TruncatedSeries> = None;
    for (j, alpha) in id.alphas.iter().enumerate() {
        let a = alpha.expand_power(p);
        let term = match &phi_pow {
            None => a,
            Some(f) => a.mul(f),
        };
        residual = residual.add(&term);
        phi_pow = Some(match phi_pow {
            None => phi.clone(),
            Some(f) => f.mul(&phi),
        });
        let _ = j;
    }
    let first_nonzero = residual.terms().next().map(|(e, c)| (e, c.clone()));
    let residual_valuation = residual.valuation();
    ResidualReport {
        cert_order: order,
        residual_valuation,
        precision: residual.precision(),
        first_nonzero,
        certified: residual_valuation >= order,
    }
}

/// `Σ_i x^i c_i` with series coefficients, indexed by x-degree.
type XPoly = Vec<TruncatedSeries>;

fn xpoly_mul(a: &XPoly, b: &XPoly, zero_prec: i64) -> XPoly {
    let mut out = vec![TruncatedSeries::zero(zero_prec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() && x.precision() >= zero_prec {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() && y.precision() >= zero_prec {
                continue;
            }
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Builds `t^{1+pq} = Σ α_j(t^p) φ^j` for a normalized germ with support gcd 1
/// and certifies it to `O(t^order)`.
///
/// Systems are tried with `k_range = 0, 1, …` so that the first one with a
/// nontrivial nullspace is the smallest; precision is doubled on failure.
pub fn construct_identity(
    germ: &AnalyticGerm,
    order: i64,
    search: &IdentitySearch,
) -> Result<JorisIdentity, SeriesError> {
    let (g, _) = support_gcd(germ);
    if g != 1 {
        return Err(SeriesError::GcdViolation { gcd: g });
    }
    let p = germ.p;
    let pu = p as usize;
    let k_max = search.k_range_max.unwrap_or((pu - 1) * (pu - 1));
    let alpha_prec = ceil_div(order, p);
    let mut working = order + 2 * p;
    let mut attempts: Vec<AttemptRecord> = Vec::new();
    let mut saw_nonzero_h = false;
    let mut last_phi_prec = None;

    for _ in 0..search.max_attempts.max(1) {
        let phi = germ.phi_at(working)?;
        if last_phi_prec == Some(phi.precision()) {
            break;
        }
        last_phi_prec = Some(phi.precision());
        let parts = phi.residue_decompose(p);
        let up = parts.iter().map(TruncatedSeries::precision).min().unwrap_or(1).max(1);
        let mut spow: Vec<XPoly> = vec![vec![TruncatedSeries::one(up)]];
        for j in 1..pu {
            let next = xpoly_mul(&spow[j - 1], &parts, up);
            spow.push(next);
        }
        let coeff = |j: usize, d: i64| -> TruncatedSeries {
            if d < 0 || d as usize >= spow[j].len() {
                TruncatedSeries::zero(up)
            } else {
                spow[j][d as usize].clone()
            }
        };

        let mut raise = false;
        'k: for k_range in 0..=k_max {
            let cols = (k_range + 1) * pu;
            let max_deg = ((pu - 1) * (pu - 1) + k_range * pu) as i64;
            let col = |c: usize| ((c / pu) as i64, c % pu);
            let residue_one = 1i64.rem_euclid(p);
            let matrix: Vec<Vec<TruncatedSeries>> = (0..=max_deg)
                .filter(|i| i.rem_euclid(p) != residue_one)
                .map(|i| {
                    (0..cols)
                        .map(|c| {
                            let (k, j) = col(c);
                            coeff(j, i - k * p)
                        })
                        .collect()
                })
                .collect();
            let basis = match nullspace_over_laurent(&matrix) {
                Ok(b) => b,
                Err(SeriesError::PrecisionExhausted { .. }) => {
                    attempts.push(AttemptRecord {
                        working_precision: working,
                        k_range,
                        nullspace_dim: 0,
                        outcome: "precision exhausted during elimination".into(),
                    });
                    raise = true;
                    break 'k;
                }
                Err(e) => return Err(e),
            };
            if basis.is_empty() {
                attempts.push(AttemptRecord {
                    working_precision: working,
                    k_range,
                    nullspace_dim: 0,
                    outcome: "trivial nullspace".into(),
                });
                continue;
            }
            for (idx, v) in basis.iter().enumerate().take(search.max_nullspace_vectors) {
                let mut record = |outcome: String| {
                    attempts.push(AttemptRecord {
                        working_precision: working,
                        k_range,
                        nullspace_dim: basis.len(),
                        outcome: format!("vector {idx}: {outcome}"),
                    })
                };
                let a: Vec<TruncatedSeries> = (0..pu)
                    .map(|j| {
                        (0..=k_range)
                            .map(|k| v[k * pu + j].shift(k as i64))
                            .reduce(|x, y| x.add(&y))
                            .expect("k_range ≥ 0")
                    })
                    .collect();
                let mut h: Option<TruncatedSeries> = None;
                for i in (0..=max_deg).filter(|i| i.rem_euclid(p) == residue_one) {
                    let s = (i - 1).div_euclid(p);
                    let ci = (0..cols)
                        .map(|c| {
                            let (k, j) = col(c);
                            v[c].mul(&coeff(j, i - k * p))
                        })
                        .reduce(|x, y| x.add(&y))
                        .expect("cols ≥ 1");
                    let term = ci.shift(s);
                    h = Some(match h {
                        None => term,
                        Some(acc) => acc.add(&term),
                    });
                }
                let Some(h) = h.filter(|h| !h.is_zero()) else {
                    record("H vanishes to precision".into());
                    continue;
                };
                saw_nonzero_h = true;
                // clear by the smallest power of u giving q ≥ 1
                let e = (1 - h.valuation()).max(0);
                let h = h.shift(e);
                let a: Vec<TruncatedSeries> = a.iter().map(|x| x.shift(e)).collect();
                let q = h.valuation();
                let c = h.leading_coefficient().expect("nonzero").clone();
                let unit = h.shift(-q);
                let h1 = unit
                    .sub(&TruncatedSeries::constant(c.clone(), unit.precision()))
                    .shift(-1);
                let inv = unit.invert_unit()?;
                let alphas: Vec<TruncatedSeries> =
                    a.iter().map(|x| x.mul(&inv).truncate(alpha_prec)).collect();
                if alphas.iter().any(|x| x.precision() < alpha_prec) {
                    record(format!("alpha known only to O(u^{})", alphas.iter().map(|x| x.precision()).min().unwrap_or(0)));
                    raise = true;
                    continue;
                }
                let field = alphas.iter().fold(germ.field, |f, s| f.join(s.field()));
                let mut id = JorisIdentity {
                    p,
                    q,
                    field,
                    alphas,
                    a,
                    c,
                    h1,
                    cert_order: order,
                    residual_valuation: 0,
                    certified: false,
                    trace: SearchTrace {
                        k_range,
                        basis_vector_index: idx,
                        working_precision: working,
                        attempts: Vec::new(),
                    },
                };
                let rep = verify_identity(&id, germ, order);
                if rep.certified {
                    record(format!("certified, q = {q}"));
                    id.residual_valuation = rep.residual_valuation;
                    id.certified = true;
                    id.trace.attempts = attempts;
                    return Ok(id);
                }
                record(format!("residual valuation {} < {order}", rep.residual_valuation));
                raise = true;
            }
            if raise {
                break 'k;
            }
        }
        let _ = raise;
        working *= 2;
    }
    let trace = attempts
        .iter()
        .map(|a| format!("W={} k={} dim={} {}", a.working_precision, a.k_range, a.nullspace_dim, a.outcome))
        .collect::<Vec<_>>()
        .join("; ");
    if saw_nonzero_h {
        Err(SeriesError::PrecisionExhausted { precision: working })
    } else {
        Err(SeriesError::NoNonzeroH { trace })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: i64, phi: &[(i64, i64)]) -> AnalyticGerm {
        let s = TruncatedSeries::from_terms(phi.iter().map(|&(e, c)| (e, Coefficient::from_integer(c))), 16);
        AnalyticGerm::monomial_pair(p, s).unwrap()
    }

    #[test]
    fn cusp() {
        let g = pair(2, &[(3, 1)]);
        let id = construct_identity(&g, 32, &IdentitySearch::default()).unwrap();
        assert_eq!(id.q, 1);
        assert!(id.alphas[0].is_zero());
        assert_eq!(id.alphas[1], TruncatedSeries::one(16));
        assert!(id.residual_valuation >= 32);
    }

    #[test]
    fn geometric_alpha() {
        let g = pair(2, &[(3, 1), (5, 1)]);
        let id = construct_identity(&g, 32, &IdentitySearch::default()).unwrap();
        assert_eq!(id.q, 1);
        let expect = TruncatedSeries::from_ints(0, &[1, 1], 16).invert_unit().unwrap();
        assert_eq!(id.alphas[1], expect);
    }

    #[test]
    fn square_of_phi() {
        let g = pair(3, &[(5, 1)]);
        let id = construct_identity(&g, 64, &IdentitySearch::default()).unwrap();
        assert_eq!(id.q, 3);
        assert!(id.alphas[0].is_zero() && id.alphas[1].is_zero());
        assert_eq!(id.alphas[2], TruncatedSeries::one(22));
    }

    #[test]
    fn gcd_gate() {
        let g = pair(4, &[(6, 1)]);
        assert_eq!(
            construct_identity(&g, 32, &IdentitySearch::default()).unwrap_err(),
            SeriesError::GcdViolation { gcd: 2 }
        );
    }

    #[test]
    fn perturbed_alpha_is_caught() {
        let g = pair(2, &[(3, 1)]);
        let mut id = construct_identity(&g, 32, &IdentitySearch::default()).unwrap();
        id.alphas[1] = TruncatedSeries::from_ints(0, &[1, 1], 16);
        let rep = verify_identity(&id, &g, 32);
        assert_eq!(rep.residual_valuation, 5);
        assert_eq!(rep.first_nonzero, Some((5, Coefficient::from_integer(1))));
        assert!(!rep.certified);
    }
}
