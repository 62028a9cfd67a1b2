//! Representations `j = a·p + b·q` in the numerical semigroup ⟨p, q⟩.

use num_integer::Integer;

use super::SeriesError;

/// Nonnegative `(a, b)` with `j = a·p + b·q` and `b` minimal, or `None` when
/// `j` is a gap of the semigroup.
pub fn coin_representation(j: u64, p: u64, q: u64) -> Result<Option<(u64, u64)>, SeriesError> {
    if p == 0 || q == 0 || p.gcd(&q) != 1 {
        return Err(SeriesError::NotCoprime { p, q });
    }
    // b ≡ j·q⁻¹ (mod p) determines the smallest admissible b
    let ext = (q as i128).extended_gcd(&(p as i128));
    let q_inv = ext.x.rem_euclid(p as i128);
    let b = ((j as i128 % p as i128) * q_inv).rem_euclid(p as i128) as u64;
    let bq = b as u128 * q as u128;
    if bq > j as u128 {
        return Ok(None);
    }
    Ok(Some(((j - bq as u64) / p, b)))
}
