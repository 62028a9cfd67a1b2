//! Ellipses `Ω_ε` with foci ±1 and sup norms of complex polynomials on them.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::exact::Interval;

/// Relative slack for float evaluation of `|g|`.
const EVAL_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexPoly {
    /// `coeffs[k]` multiplies `z^k`.
    pub coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Coefficients with real and imaginary parts uniform in `[-1, 1]`.
    pub fn random<R: Rng>(degree: usize, rng: &mut R) -> Self {
        Self::new(
            (0..=degree)
                .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                .collect(),
        )
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `Σ k |c_k| R^{k-1}`, a bound for `|g'|` on `|z| ≤ R`.
    pub fn derivative_bound(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c.norm() * r.powi(k as i32 - 1))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EllipseDomain {
    pub eps: f64,
}

impl EllipseDomain {
    pub fn new(eps: f64) -> Self {
        assert!(eps >= 0.0, "ellipse parameter must be nonnegative");
        Self { eps }
    }

    /// `cosh ε cos θ + i sinh ε sin θ`. At `ε = 0` this traces `[-1, 1]`.
    pub fn boundary(&self, theta: f64) -> Complex64 {
        Complex64::new(self.eps.cosh() * theta.cos(), self.eps.sinh() * theta.sin())
    }

    pub fn semi_major(&self) -> f64 {
        self.eps.cosh()
    }

    pub fn semi_minor(&self) -> f64 {
        self.eps.sinh()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        if self.eps == 0.0 {
            return z.im == 0.0 && z.re.abs() <= 1.0;
        }
        (z.re / self.semi_major()).powi(2) + (z.im / self.semi_minor()).powi(2) <= 1.0
    }
}

/// Sup of `|g|` over `Ω_ε`, attained on the boundary. The upper end adds a
/// Lipschitz bound over the gap between consecutive samples.
pub fn sup_norm_ellipse(g: &ComplexPoly, eps: f64, n_samples: usize) -> Interval {
    let dom = EllipseDomain::new(eps);
    let n = n_samples.max(4);
    let mut best: f64 = 0.0;
    for i in 0..n {
        let theta = std::f64::consts::TAU * i as f64 / n as f64;
        best = best.max(g.eval(dom.boundary(theta)).norm());
    }
    // |d/dθ g(b(θ))| ≤ sup|g'| · |b'(θ)| ≤ sup|g'| · cosh ε on |z| ≤ cosh ε
    let r = dom.semi_major();
    let lip = g.derivative_bound(r) * r;
    let gap = std::f64::consts::PI / n as f64;
    let slack = EVAL_SLACK * (best + g.coeffs.iter().map(|c| c.norm()).sum::<f64>() * r.powi(g.degree() as i32));
    let lo = (best - slack).max(0.0);
    let hi = best + lip * gap + slack;
    Interval::new(lo, hi.next_up())
}

/// `‖g‖_{[-1,1]}`, the degenerate ellipse.
pub fn sup_norm_segment(g: &ComplexPoly, n_samples: usize) -> Interval {
    sup_norm_ellipse(g, 0.0, n_samples)
}
