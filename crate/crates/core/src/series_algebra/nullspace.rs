//! Gaussian elimination over the Laurent field of truncated series.

use num_traits::One;

use super::{SeriesError, TruncatedSeries};

/// Product `matrix · v`, entry by entry with tracked precision.
pub fn mat_vec(matrix: &[Vec<TruncatedSeries>], v: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .map(|(a, x)| a.mul(x))
                .reduce(|s, t| s.add(&t))
                .unwrap_or_else(|| TruncatedSeries::zero(i64::MAX / 4))
        })
        .collect()
}

/// Basis of the right nullspace of a truncated system.
///
/// Pivots are chosen with minimal valuation over the remaining submatrix,
/// ties broken by the smallest column index and then the smallest row index.
/// Entries that are zero to their known precision are treated as zero; if
/// such an entry carries no information at all (precision ≤ 0) elimination
/// stops with `PrecisionExhausted`.
///
/// Each returned vector is shifted so that its minimal entry valuation is 0
/// and scaled so that the first entry attaining that valuation has leading
/// coefficient 1.
pub fn nullspace_over_laurent(
    matrix: &[Vec<TruncatedSeries>],
) -> Result<Vec<Vec<TruncatedSeries>>, SeriesError> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(SeriesError::InvalidGerm("ragged matrix".into()));
    }
    let mut a: Vec<Vec<TruncatedSeries>> = matrix.to_vec();
    let mut row_used = vec![false; rows];
    let mut col_pivot: Vec<Option<usize>> = vec![None; cols];

    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for c in 0..cols {
            if col_pivot[c].is_some() {
                continue;
            }
            for (r, row) in a.iter().enumerate() {
                if row_used[r] {
                    continue;
                }
                let e = &row[c];
                if e.is_zero() {
                    if e.precision() <= 0 {
                        return Err(SeriesError::PrecisionExhausted {
                            precision: e.precision(),
                        });
                    }
                    continue;
                }
                let key = (e.valuation(), c, r);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, pc, pr)) = best else { break };
        row_used[pr] = true;
        col_pivot[pc] = Some(pr);
        let pivot_inv = a[pr][pc].invert()?;
        for r in 0..rows {
            if r == pr || a[r][pc].is_zero() {
                continue;
            }
            let factor = a[r][pc].mul(&pivot_inv);
            for c in 0..cols {
                if c == pc {
                    a[r][c] = TruncatedSeries::zero(a[r][c].precision().max(1));
                    continue;
                }
                if a[pr][c].is_zero() && a[pr][c].precision() >= a[r][c].precision() {
                    continue;
                }
                let upd = factor.mul(&a[pr][c]);
                a[r][c] = a[r][c].sub(&upd);
            }
        }
    }

    // exact entries of a basis vector get the largest precision in the input
    let exact_prec = matrix
        .iter()
        .flatten()
        .map(TruncatedSeries::precision)
        .max()
        .unwrap_or(1)
        .max(1);
    let mut basis = Vec::new();
    for f in 0..cols {
        if col_pivot[f].is_some() {
            continue;
        }
        let mut v: Vec<TruncatedSeries> = Vec::with_capacity(cols);
        for c in 0..cols {
            let entry = if c == f {
                TruncatedSeries::one(exact_prec)
            } else if let Some(r) = col_pivot[c] {
                a[r][f].div(&a[r][c])?.neg()
            } else {
                TruncatedSeries::zero(exact_prec)
            };
            v.push(entry);
        }
        basis.push(normalize_vector(v));
    }
    Ok(basis)
}

fn normalize_vector(v: Vec<TruncatedSeries>) -> Vec<TruncatedSeries> {
    let Some(min_val) = v.iter().filter(|e| !e.is_zero()).map(|e| e.valuation()).min() else {
        return v;
    };
    let lead = v
        .iter()
        .find(|e| !e.is_zero() && e.valuation() == min_val)
        .and_then(|e| e.leading_coefficient())
        .cloned()
        .expect("some entry attains the minimum");
    let scale = lead.inv().expect("nonzero leading coefficient");
    v.into_iter()
        .map(|e| {
            let s = e.shift(-min_val);
            if scale.is_one() {
                s
            } else {
                s.scale(&scale)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Coefficient;

    fn mono(c: i64, e: i64) -> TruncatedSeries {
        TruncatedSeries::monomial(Coefficient::from_integer(c), e, 16)
    }

    #[test]
    fn one_equation_two_unknowns() {
        let m = vec![vec![mono(1, 0), mono(1, 2)]];
        let basis = nullspace_over_laurent(&m).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0][0], mono(-1, 2));
        assert_eq!(basis[0][1].truncate(16), TruncatedSeries::one(16));
    }

    #[test]
    fn dependent_rows() {
        let m = vec![vec![mono(1, 0), mono(1, 1)], vec![mono(1, 1), mono(1, 2)]];
        let basis = nullspace_over_laurent(&m).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0][0].truncate(15), mono(-1, 1).truncate(15));
        for r in mat_vec(&m, &basis[0]) {
            assert!(r.is_zero());
        }
    }

    #[test]
    fn full_rank_has_empty_basis() {
        let m = vec![vec![mono(1, 0), TruncatedSeries::zero(16)], vec![TruncatedSeries::zero(16), mono(1, 0)]];
        assert!(nullspace_over_laurent(&m).unwrap().is_empty());
    }

    #[test]
    fn uninformative_entry_is_an_error() {
        let m = vec![vec![TruncatedSeries::zero(0), mono(1, 0)]];
        assert!(matches!(
            nullspace_over_laurent(&m),
            Err(SeriesError::PrecisionExhausted { .. })
        ));
    }
}
