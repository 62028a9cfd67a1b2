//! Directional derivatives versus the full `k`-linear derivative of a
//! polynomial in `d ≤ 4` variables.

use std::collections::HashMap;
use std::f64::consts::{E, TAU};

use rand::Rng;
use serde::Serialize;

use super::NumericError;

/// A real polynomial in `d` variables as `(exponents, coefficient)` terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiPoly {
    pub dim: usize,
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl MultiPoly {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self, NumericError> {
        if let Some((e, _)) = terms.iter().find(|(e, _)| e.len() != dim) {
            return Err(NumericError::InvalidInput(format!(
                "term exponent {e:?} has the wrong length for dimension {dim}"
            )));
        }
        Ok(Self { dim, terms })
    }

    /// `x_i^k`.
    pub fn coordinate_power(dim: usize, i: usize, k: u32) -> Self {
        let mut e = vec![0; dim];
        e[i] = k;
        Self {
            dim,
            terms: vec![(e, 1.0)],
        }
    }

    /// Random coefficients in `[-1, 1]` on every monomial of degree `≤ degree`.
    pub fn random(dim: usize, degree: u32, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        let mut e = vec![0u32; dim];
        loop {
            if e.iter().sum::<u32>() <= degree {
                terms.push((e.clone(), rng.gen_range(-1.0..=1.0)));
            }
            let mut i = 0;
            loop {
                if i == dim {
                    return Self { dim, terms };
                }
                e[i] += 1;
                if e[i] <= degree {
                    break;
                }
                e[i] = 0;
                i += 1;
            }
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    /// `∂^α f(x)`.
    pub fn partial(&self, alpha: &[u32], x: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| e.iter().zip(alpha).all(|(b, a)| b >= a))
            .map(|(e, c)| {
                let mut v = *c;
                for ((&b, &a), &xi) in e.iter().zip(alpha).zip(x) {
                    for r in 0..a {
                        v *= (b - r) as f64;
                    }
                    v *= xi.powi((b - a) as i32);
                }
                v
            })
            .sum()
    }

    /// The symmetric tensor `f^{(k)}(x)` as a flat `d^k` array.
    pub fn derivative_tensor(&self, x: &[f64], k: u32) -> Tensor {
        let d = self.dim;
        let size = d.pow(k);
        let mut cache: HashMap<Vec<u32>, f64> = HashMap::new();
        let mut data = Vec::with_capacity(size);
        for flat in 0..size {
            let mut alpha = vec![0u32; d];
            let mut rest = flat;
            for _ in 0..k {
                alpha[rest % d] += 1;
                rest /= d;
            }
            let v = *cache.entry(alpha.clone()).or_insert_with(|| self.partial(&alpha, x));
            data.push(v);
        }
        Tensor { dim: d, order: k, data }
    }
}

/// A `k`-linear form on `R^d`, stored with the first slot varying fastest.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub dim: usize,
    pub order: u32,
    data: Vec<f64>,
}

impl Tensor {
    /// `T[v_1, …, v_k]`.
    pub fn apply(&self, vs: &[&[f64]]) -> f64 {
        let mut cur = self.data.clone();
        for v in vs {
            cur = contract_first(&cur, v, self.dim);
        }
        cur[0]
    }

    /// The linear form `T[v_1, …, v_{i-1}, ·, v_{i+1}, …]` as a vector.
    fn gradient_slot(&self, vs: &[&[f64]], slot: usize) -> Vec<f64> {
        let mut cur = self.data.clone();
        let d = self.dim;
        // contract slots before `slot` (they are the fastest-varying ones)
        for v in &vs[..slot] {
            cur = contract_first(&cur, v, d);
        }
        // now slot is first; contract the trailing slots from the back
        let mut len = cur.len();
        for v in vs[slot + 1..].iter().rev() {
            let block = len / d;
            let mut next = vec![0.0; block];
            for (j, vj) in v.iter().enumerate() {
                for (i, n) in next.iter_mut().enumerate() {
                    *n += cur[j * block + i] * vj;
                }
            }
            cur = next;
            len = block;
        }
        cur
    }

    fn diagonal(&self, v: &[f64]) -> f64 {
        let vs: Vec<&[f64]> = (0..self.order).map(|_| v).collect();
        self.apply(&vs)
    }
}

fn contract_first(data: &[f64], v: &[f64], d: usize) -> Vec<f64> {
    data.chunks(d).map(|c| c.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Van der Corput radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic low-discrepancy unit vectors on `S^{d-1}`, `d ≤ 4`.
pub fn sphere_point(d: usize, i: u64, offset: usize) -> Vec<f64> {
    let u = |j: usize| radical_inverse(i + 1, PRIMES[(offset + j) % PRIMES.len()]);
    match d {
        1 => vec![if u(0) < 0.5 { 1.0 } else { -1.0 }],
        2 => {
            let a = TAU * u(0);
            vec![a.cos(), a.sin()]
        }
        3 => {
            let z = 2.0 * u(0) - 1.0;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = TAU * u(1);
            vec![r * a.cos(), r * a.sin(), z]
        }
        4 => {
            let (s, a, b) = (u(0), TAU * u(1), TAU * u(2));
            let (p, q) = ((1.0 - s).sqrt(), s.sqrt());
            vec![p * a.sin(), p * a.cos(), q * b.sin(), q * b.cos()]
        }
        _ => panic!("sphere sampling supports d ≤ 4"),
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `g` on `[a, b]`.
fn golden_max(mut a: f64, mut b: f64, g: impl Fn(f64) -> f64, iters: usize) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = g(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Sup of `|T[v, …, v]|` over unit `v`.
fn directional_sup(t: &Tensor, samples: u64) -> (f64, Vec<f64>) {
    let d = t.dim;
    let mut scored: Vec<(f64, Vec<f64>)> = (0..samples)
        .map(|i| {
            let v = sphere_point(d, i, 0);
            (t.diagonal(&v).abs(), v)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(8);
    let mut best = (0.0, vec![0.0; d]);
    if d > 0 {
        best.1[0] = 1.0;
    }
    for (mut val, mut v) in scored {
        // power steps toward a critical point, kept only while they improve
        for _ in 0..50 {
            let vs: Vec<&[f64]> = (0..t.order).map(|_| v.as_slice()).collect();
            let mut g = t.gradient_slot(&vs, 0);
            if !normalize(&mut g) {
                break;
            }
            let gv = t.diagonal(&g).abs();
            if gv <= val {
                break;
            }
            val = gv;
            v = g;
        }
        // golden-section refinement along great circles through v
        let mut width = 0.5;
        for _ in 0..30 {
            let mut improved = false;
            for axis in 0..d {
                let mut w = vec![0.0; d];
                w[axis] = 1.0;
                let dot: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(&v).for_each(|(a, b)| *a -= dot * b);
                if !normalize(&mut w) {
                    continue;
                }
                let rot = |th: f64| -> Vec<f64> {
                    v.iter().zip(&w).map(|(a, b)| th.cos() * a + th.sin() * b).collect()
                };
                let (th, gv) = golden_max(-width, width, |th| t.diagonal(&rot(th)).abs(), 40);
                if gv > val {
                    val = gv;
                    v = rot(th);
                    normalize(&mut v);
                    improved = true;
                }
            }
            if !improved {
                width *= 0.25;
                if width < 1e-10 {
                    break;
                }
            }
        }
        if val > best.0 {
            best = (val, v);
        }
    }
    best
}

/// Sup of `|T[v_1, …, v_k]|` over unit `v_i`, by alternating maximization
/// (each slot is linear, so its optimum is the normalized gradient).
fn operator_norm(t: &Tensor, samples: u64, diagonal_seeds: &[Vec<f64>]) -> f64 {
    let d = t.dim;
    let k = t.order as usize;
    let mut starts: Vec<Vec<Vec<f64>>> = diagonal_seeds.iter().map(|v| vec![v.clone(); k]).collect();
    for i in 0..samples {
        starts.push((0..k).map(|s| sphere_point(d, i, 3 * s + 1)).collect());
    }
    let mut best = 0.0f64;
    for mut vs in starts {
        let mut val = {
            let refs: Vec<&[f64]> = vs.iter().map(Vec::as_slice).collect();
            t.apply(&refs).abs()
        };
        for _ in 0..100 {
            let before = val;
            for slot in 0..k {
                let refs: Vec<&[f64]> = vs.iter().map(Vec::as_slice).collect();
                let mut g = t.gradient_slot(&refs, slot);
                let gn = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if gn > val && normalize(&mut g) {
                    vs[slot] = g;
                    let refs: Vec<&[f64]> = vs.iter().map(Vec::as_slice).collect();
                    val = val.max(t.apply(&refs).abs());
                }
            }
            if val <= before * (1.0 + 1e-15) {
                break;
            }
        }
        best = best.max(val);
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarizationMargins {
    pub k: u32,
    pub directional_sup: f64,
    pub operator_norm: f64,
    /// `‖f^{(k)}(x)‖ − sup |d_v^k f(x)|`.
    pub lower: f64,
    /// `(2e)^k sup |d_v^k f(x)| − ‖f^{(k)}(x)‖`.
    pub upper: f64,
    pub samples: u64,
}

/// Both sides of the polarization inequality at `x`. Sampling doubles
/// until both sups are stable to three digits.
pub fn polarization_check(f: &MultiPoly, x: &[f64], k: u32, n_dirs: u64) -> Result<PolarizationMargins, NumericError> {
    if f.dim == 0 || f.dim > 4 || k == 0 || k > 6 {
        return Err(NumericError::InvalidInput(format!(
            "polarization needs 1 ≤ d ≤ 4 and 1 ≤ k ≤ 6, got d = {}, k = {k}",
            f.dim
        )));
    }
    if x.len() != f.dim {
        return Err(NumericError::InvalidInput("point has the wrong dimension".into()));
    }
    let t = f.derivative_tensor(x, k);
    let mut samples = n_dirs.max(8);
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..8 {
        let (dir, v) = directional_sup(&t, samples);
        let op = operator_norm(&t, samples / 4 + 1, &[v]).max(dir);
        let stable = prev.is_some_and(|(pd, po)| {
            (dir - pd).abs() <= 1e-3 * dir.abs().max(1e-300) && (op - po).abs() <= 1e-3 * op.abs().max(1e-300)
        });
        if stable || (dir == 0.0 && op == 0.0 && prev.is_some()) {
            return Ok(PolarizationMargins {
                k,
                directional_sup: dir,
                operator_norm: op,
                lower: op - dir,
                upper: (2.0 * E).powi(k as i32) * dir - op,
                samples,
            });
        }
        prev = Some((dir, op));
        samples *= 2;
    }
    Err(NumericError::SamplingBudgetExceeded { samples })
}
