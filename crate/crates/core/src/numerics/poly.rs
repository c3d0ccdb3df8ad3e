//! Dense polynomials with complex coefficients and real-root isolation.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of grid cells used to bracket sign changes.
pub const ROOT_GRID_CELLS: usize = 1024;

/// Polynomial stored in ascending degree order.
///
/// Trailing zero coefficients are trimmed on construction so the leading
/// coefficient is nonzero, except for the zero polynomial which keeps a
/// single `0` coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`
    pub fn linear_factor(root: f64) -> Self {
        Self::from_real(&[-root, 1.0])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Horner evaluation of the real parts of the coefficients.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.re)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(Complex64::new(0.0, 0.0));
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Cauchy bound: every root satisfies `|z| <= 1 + max |a_k / a_n|`.
    pub fn cauchy_bound(&self) -> f64 {
        let lead = self.coeffs[self.degree()].norm();
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max)
    }

    /// Scale for absolute residuals at `x`: `sum |a_k| |x|^k`.
    fn magnitude_at(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x.abs() + c.norm())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + rhs.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// All real roots of `p` in the closed interval, sorted and deduplicated.
///
/// The real parts of the coefficients are used. The interval is split at the
/// roots of `p'` (found recursively) and at a uniform grid of
/// [`ROOT_GRID_CELLS`] cells; `p` is monotone between consecutive critical
/// points, so each sign change brackets exactly one simple root. Brackets are
/// shrunk by bisection and polished with safeguarded Newton steps. Even
/// multiplicity roots show up as critical points where `p` vanishes.
pub fn find_real_roots(p: &Polynomial, interval: (f64, f64)) -> Result<Vec<f64>> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Configuration(format!(
            "root interval must be finite and ordered, got [{a}, {b}]"
        )));
    }
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let real = Polynomial::from_real(&p.coeffs.iter().map(|c| c.re).collect::<Vec<_>>());
    if real.degree() == 0 {
        return Ok(Vec::new());
    }
    real_roots_rec(&real, a, b)
}

fn real_roots_rec(p: &Polynomial, a: f64, b: f64) -> Result<Vec<f64>> {
    let deg = p.degree();
    if deg == 0 {
        return Ok(Vec::new());
    }
    if deg == 1 {
        let r = -p.coeffs[0].re / p.coeffs[1].re;
        return Ok(if r >= a && r <= b { vec![r] } else { Vec::new() });
    }

    let critical = real_roots_rec(&p.derivative(), a, b)?;

    let mut nodes: Vec<f64> = (0..=ROOT_GRID_CELLS)
        .map(|k| a + (b - a) * k as f64 / ROOT_GRID_CELLS as f64)
        .collect();
    nodes.extend(critical.iter().copied());
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let zero_tol = |x: f64| 64.0 * f64::EPSILON * (deg as f64 + 1.0) * p.magnitude_at(x);

    let mut roots = Vec::new();
    for &c in &critical {
        if p.eval_real(c).abs() <= zero_tol(c) {
            roots.push(c);
        }
    }

    let values: Vec<f64> = nodes.iter().map(|&x| p.eval_real(x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "polynomial evaluation overflowed on the root grid".into(),
        ));
    }
    for (k, (&x, &v)) in nodes.iter().zip(&values).enumerate() {
        if v == 0.0 {
            roots.push(x);
            continue;
        }
        if k + 1 < nodes.len() {
            let w = values[k + 1];
            if w != 0.0 && v.signum() != w.signum() {
                roots.push(refine_bracket(p, x, nodes[k + 1], v)?);
            }
        }
    }

    roots.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last() {
            Some(&last) if (r - last).abs() <= 1e-10 * (1.0 + r.abs()) => {}
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

fn refine_bracket(p: &Polynomial, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    let dp = p.derivative();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            break;
        }
        let f_mid = p.eval_real(mid);
        if !f_mid.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite polynomial value at {mid}"
            )));
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * (1.0 + lo.abs()) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let f = p.eval_real(x);
        let d = dp.eval_real(x);
        if f == 0.0 || d == 0.0 {
            break;
        }
        let next = x - f / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        if (next - x).abs() <= f64::EPSILON * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    if !(x >= lo && x <= hi) {
        return Err(Error::NumericalFailure(format!(
            "root refinement left bracket [{lo}, {hi}]"
        )));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn resolvent_of_the_eguchi_hanson_example() {
        // H^2 - 4.5 H + 2
        let p = Polynomial::from_real(&[2.0, -4.5, 1.0]);
        let roots = find_real_roots(&p, (-10.0, 10.0)).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 0.5).abs() < 1e-12);
        assert!((roots[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn linear_and_rootless_cases() {
        let roots = find_real_roots(&Polynomial::from_real(&[-4.0, 1.0]), (0.0, 10.0)).unwrap();
        assert_eq!(roots, vec![4.0]);
        let none = find_real_roots(&Polynomial::from_real(&[1.0, 0.0, 1.0]), (-10.0, 10.0)).unwrap();
        assert!(none.is_empty());
        let constant = find_real_roots(&Polynomial::from_real(&[3.0]), (-1.0, 1.0)).unwrap();
        assert!(constant.is_empty());
    }

    #[test]
    fn double_and_close_roots() {
        // (x - 1)^2 (x + 2)
        let p = &(&Polynomial::linear_factor(1.0) * &Polynomial::linear_factor(1.0))
            * &Polynomial::linear_factor(-2.0);
        let roots = find_real_roots(&p, (-5.0, 5.0)).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 2.0).abs() < 1e-12);
        assert!((roots[1] - 1.0).abs() < 1e-7);

        // two roots inside one grid cell
        let q = &Polynomial::linear_factor(0.1) * &Polynomial::linear_factor(0.1 + 1e-6);
        let roots = find_real_roots(&q, (-10.0, 10.0)).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 0.1).abs() < 1e-12);
        assert!((roots[1] - 0.1 - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_and_trimming() {
        let p = Polynomial::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        let q = &p - &p;
        assert!(q.is_zero());
        let d = Polynomial::from_real(&[1.0, 1.0, 1.0]).derivative();
        assert_eq!(d, Polynomial::from_real(&[1.0, 2.0]));
    }

    proptest! {
        #[test]
        fn roots_are_zeros(r1 in -5.0f64..5.0, r2 in -5.0f64..5.0, r3 in -5.0f64..5.0, lead in 0.2f64..3.0) {
            let p = (&(&Polynomial::linear_factor(r1) * &Polynomial::linear_factor(r2))
                * &Polynomial::linear_factor(r3)).scale(Complex64::new(lead, 0.0));
            let roots = find_real_roots(&p, (-6.0, 6.0)).unwrap();
            prop_assert!(!roots.is_empty());
            let sup = (0..=200).map(|k| p.eval_real(-6.0 + 12.0 * k as f64 / 200.0).abs()).fold(0.0, f64::max);
            for r in &roots {
                prop_assert!(p.eval_real(*r).abs() < 1e-10 * (1.0 + sup));
            }
            for t in [r1, r2, r3] {
                prop_assert!(roots.iter().any(|r| (r - t).abs() < 1e-6));
            }
        }
    }
}
