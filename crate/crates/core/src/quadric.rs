//! Harmonic functions constant on the confocal quadrics `Σ xᵢ²/(H − βᵢ) = C`.
//!
//! `V` is the hyperelliptic integral `∫ dH / √Π(H − βᵢ)` evaluated at the
//! algebraic root `H(x)`; `V̂ = ∂V/∂C` is algebraic in `H`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::branch::sqrt_along_segment;
use crate::numerics::{
    fd_gradient, find_real_roots, integrate_adaptive, ode_solve, Bound, FdScheme, Polynomial,
    Trajectory,
};

/// Constants `β₁…βₙ` and `C` of a confocal family.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricFamily {
    betas: Vec<f64>,
    c: f64,
    repeated: bool,
}

impl QuadricFamily {
    pub fn new(betas: Vec<f64>, c: f64) -> Result<Self> {
        if betas.len() < 2 {
            return Err(Error::Configuration(format!(
                "need at least two betas, got {}",
                betas.len()
            )));
        }
        if betas.iter().any(|b| !b.is_finite()) || !c.is_finite() {
            return Err(Error::Configuration("betas and C must be finite".into()));
        }
        let repeated = (0..betas.len()).any(|i| (0..i).any(|j| betas[i] == betas[j]));
        Ok(Self { betas, c, repeated })
    }

    /// `β = (a², a², 0)`, `C = 1`: the family whose potential is the Eguchi-Hanson one.
    pub fn eguchi_hanson(a: f64) -> Result<Self> {
        Self::new(vec![a * a, a * a, 0.0], 1.0)
    }

    pub fn n(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Whether two or more betas coincide (the focal set is then larger).
    pub fn has_repeated(&self) -> bool {
        self.repeated
    }

    pub fn max_beta(&self) -> f64 {
        self.betas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::new(self.betas.clone(), c)
    }

    /// `Π (H − βᵢ)` over all n betas.
    pub fn product(&self, h: f64) -> f64 {
        self.betas.iter().map(|b| h - b).product()
    }

    /// Distinct beta values with their multiplicities.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &b in &self.betas {
            match out.iter_mut().find(|(v, _)| *v == b) {
                Some(e) => e.1 += 1,
                None => out.push((b, 1)),
            }
        }
        out
    }

    /// Point of the quadric at level `h` along the unit direction `u`:
    /// `xᵢ = √(C(h − βᵢ))·uᵢ`. Needs `C(h − βᵢ) ≥ 0` for every i.
    pub fn quadric_point(&self, h: f64, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n() {
            return Err(Error::Configuration("direction has the wrong dimension".into()));
        }
        self.betas
            .iter()
            .zip(u)
            .map(|(b, ui)| {
                let s = self.c * (h - b);
                if s < 0.0 {
                    Err(Error::NoSheet(format!("C(H - beta) < 0 at H = {h}")))
                } else {
                    Ok(s.sqrt() * ui)
                }
            })
            .collect()
    }
}

/// Where `V` is pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// `V → 0` as `H → ∞`; converges for n ≥ 3.
    AtInfinity,
    /// `V = 0` at the largest beta not exceeding `H`, which must be simple.
    AtMaxBeta,
}

impl Reference {
    pub fn default_for(fam: &QuadricFamily) -> Self {
        if fam.n() >= 3 {
            Reference::AtInfinity
        } else {
            Reference::AtMaxBeta
        }
    }
}

/// The profile `V(H)` with its reference point and orientation.
#[derive(Debug, Clone)]
pub struct HProfile {
    family: QuadricFamily,
    reference: Reference,
    direction: f64,
    tol: f64,
}

impl HProfile {
    pub fn new(family: QuadricFamily, reference: Reference, direction: f64) -> Result<Self> {
        if reference == Reference::AtInfinity && family.n() < 3 {
            return Err(Error::Configuration(
                "reference at infinity diverges for n = 2; use at-max-beta".into(),
            ));
        }
        if direction != 1.0 && direction != -1.0 {
            return Err(Error::Configuration(format!("direction must be ±1, got {direction}")));
        }
        Ok(Self { family, reference, direction, tol: 1e-10 })
    }

    /// Default reference for the family, `Ḣ > 0`.
    pub fn for_family(family: &QuadricFamily) -> Self {
        let reference = Reference::default_for(family);
        Self { family: family.clone(), reference, direction: 1.0, tol: 1e-10 }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn family(&self) -> &QuadricFamily {
        &self.family
    }

    pub fn reference(&self) -> Reference {
        self.reference
    }

    pub fn direction(&self) -> f64 {
        self.direction
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `V(H)` measured from the reference, times the orientation sign.
    pub fn v_of_h(&self, h: f64) -> Result<f64> {
        let fam = &self.family;
        let v = match self.reference {
            Reference::AtInfinity => {
                let top = fam.max_beta();
                if !(h > top) {
                    return Err(Error::FocalSet(format!("H = {h} does not exceed max beta {top}")));
                }
                let u0 = (h - top).powf(-0.5);
                let d: Vec<f64> = fam.betas().iter().map(|b| top - b).collect();
                let n = fam.n() as i32;
                let integrand = |u: f64| {
                    let p: f64 = d.iter().map(|di| 1.0 + di * u * u).product();
                    2.0 * u.powi(n - 3) / p.sqrt()
                };
                -integrate_adaptive(integrand, 0.0, Bound::Finite(u0), self.tol)?
            }
            Reference::AtMaxBeta => {
                let star = fam
                    .betas()
                    .iter()
                    .copied()
                    .filter(|b| *b <= h)
                    .fold(f64::NEG_INFINITY, f64::max);
                if !star.is_finite() {
                    return Err(Error::NoSheet(format!("no beta below H = {h}")));
                }
                let mult = fam.betas().iter().filter(|b| **b == star).count();
                if mult > 1 {
                    return Err(Error::Configuration(format!(
                        "reference beta {star} is repeated; the integral diverges there"
                    )));
                }
                let rest: Vec<f64> =
                    fam.betas().iter().copied().filter(|b| *b != star).collect();
                let v0 = (h - star).sqrt();
                let others = |v: f64| rest.iter().map(|b| star + v * v - b).product::<f64>();
                if others(0.5 * v0) <= 0.0 {
                    return Err(Error::NoSheet(format!(
                        "product of (H - beta) is negative between {star} and {h}"
                    )));
                }
                let integrand = |v: f64| 2.0 / others(v).abs().sqrt();
                integrate_adaptive(integrand, 0.0, Bound::Finite(v0), self.tol)?
            }
        };
        Ok(self.direction * v)
    }
}

/// `H`, `V` and `V̂` at one point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FieldSample {
    pub point: Vec<f64>,
    pub h: f64,
    pub v: f64,
    pub vhat: f64,
}

fn resolvent_terms(x: &[f64], fam: &QuadricFamily) -> Result<Vec<(f64, f64)>> {
    if x.len() != fam.n() {
        return Err(Error::Configuration(format!(
            "point has dimension {}, family has n = {}",
            x.len(),
            fam.n()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Configuration("point must be finite".into()));
    }
    let mut terms: Vec<(f64, f64)> = Vec::new();
    for (xi, &b) in x.iter().zip(fam.betas()) {
        let w = xi * xi;
        match terms.iter_mut().find(|(v, _)| *v == b) {
            Some(t) => t.1 += w,
            None => terms.push((b, w)),
        }
    }
    terms.retain(|(_, w)| *w > 0.0);
    Ok(terms)
}

/// Largest real root `H` of `Σ xᵢ²/(H − βᵢ) = C`.
pub fn solve_quadric_h(x: &[f64], fam: &QuadricFamily) -> Result<f64> {
    let terms = resolvent_terms(x, fam)?;
    let c = fam.c();
    if terms.is_empty() {
        return if c == 0.0 {
            Err(Error::FocalSet("the origin lies on every cone".into()))
        } else {
            Err(Error::NoSheet("the origin lies on no quadric with C != 0".into()))
        };
    }
    // clear denominators over the distinct betas that carry weight
    let mut resolvent = Polynomial::constant(Complex64::new(0.0, 0.0));
    let mut full = Polynomial::constant(Complex64::new(1.0, 0.0));
    for (k, &(_, w)) in terms.iter().enumerate() {
        let mut term = Polynomial::constant(Complex64::new(w, 0.0));
        for (j, &(bj, _)) in terms.iter().enumerate() {
            if j != k {
                term = &term * &Polynomial::linear_factor(bj);
            }
        }
        resolvent = &resolvent + &term;
    }
    for &(b, _) in &terms {
        full = &full * &Polynomial::linear_factor(b);
    }
    resolvent = &resolvent - &full.scale(Complex64::new(c, 0.0));
    let bound = resolvent.cauchy_bound() + 1.0;
    let roots = find_real_roots(&resolvent, (-bound, bound))?;
    let mut h = *roots
        .last()
        .ok_or_else(|| Error::NoSheet("the resolvent has no real root".into()))?;

    let f = |h: f64| terms.iter().map(|(b, w)| w / (h - b)).sum::<f64>() - c;
    let df = |h: f64| -terms.iter().map(|(b, w)| w / ((h - b) * (h - b))).sum::<f64>();
    if c > 0.0 {
        h = refine_above_top(&terms, c, h);
    }
    for _ in 0..3 {
        let r = f(h);
        let next = h - r / df(h);
        if next.is_finite() && f(next).abs() < r.abs() {
            h = next;
        } else {
            break;
        }
    }
    let scale: f64 = 1.0 + terms.iter().map(|(b, w)| (w / (h - b)).abs()).sum::<f64>();
    let residual = f(h).abs();
    // rounding H alone moves f by about ε|H||f′(H)|, large near the focal set
    let conditioning = 8.0 * f64::EPSILON * h.abs().max(1.0) * df(h).abs();
    if !(residual < 1e-10 * scale + conditioning) {
        return Err(Error::NumericalFailure(format!(
            "quadric residual {residual:e} at H = {h}"
        )));
    }
    if c > 0.0 && h <= fam.max_beta() {
        return Err(Error::FocalSet(format!(
            "root H = {h} does not exceed max beta {}",
            fam.max_beta()
        )));
    }
    Ok(h)
}

/// For `C > 0` the sum is strictly decreasing above the top weighted β, so
/// the largest root is bracketed there. Works in `t = H − β_top` to keep the
/// small denominator exact near the focal set.
fn refine_above_top(terms: &[(f64, f64)], c: f64, guess: f64) -> f64 {
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let g = |t: f64| {
        terms
            .iter()
            .map(|&(b, w)| if b == top { w / t } else { w / (t + (top - b)) })
            .sum::<f64>()
            - c
    };
    let dg = |t: f64| {
        -terms
            .iter()
            .map(|&(b, w)| {
                let d = if b == top { t } else { t + (top - b) };
                w / (d * d)
            })
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0, terms.iter().map(|t| t.1).sum::<f64>() / c);
    let mut t = guess - top;
    if !(t > lo && t < hi) {
        t = 0.5 * hi;
    }
    for _ in 0..200 {
        let r = g(t);
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - r / dg(t);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs() || hi - lo <= f64::EPSILON * hi {
            t = next;
            break;
        }
        t = next;
    }
    top + t
}

/// Residual `|Σ xᵢ²/(H − βᵢ) − C|` of a candidate `H`.
pub fn quadric_residual(x: &[f64], fam: &QuadricFamily, h: f64) -> f64 {
    let s: f64 = x.iter().zip(fam.betas()).map(|(xi, b)| xi * xi / (h - b)).sum();
    (s - fam.c()).abs()
}

pub fn eval_v(x: &[f64], fam: &QuadricFamily, prof: &HProfile) -> Result<f64> {
    let h = solve_quadric_h(x, fam)?;
    prof.v_of_h(h)
}

fn vhat_at(x: &[f64], fam: &QuadricFamily, h: f64) -> Result<f64> {
    let p = fam.product(h);
    if !(p > 0.0) {
        return Err(Error::NoSheet(format!("product of (H - beta) is {p} at H = {h}")));
    }
    let s2: f64 = x
        .iter()
        .zip(fam.betas())
        .filter(|(xi, _)| **xi != 0.0)
        .map(|(xi, b)| xi * xi / ((h - b) * (h - b)))
        .sum();
    Ok(-1.0 / (p.sqrt() * s2))
}

/// `V̂ = ∂V/∂C = −Π^{-1/2} (Σ xᵢ²/(H − βᵢ)²)^{-1}`.
pub fn eval_vhat(x: &[f64], fam: &QuadricFamily) -> Result<f64> {
    let h = solve_quadric_h(x, fam)?;
    vhat_at(x, fam, h)
}

pub fn sample(x: &[f64], fam: &QuadricFamily, prof: &HProfile) -> Result<FieldSample> {
    let h = solve_quadric_h(x, fam)?;
    Ok(FieldSample { point: x.to_vec(), h, v: prof.v_of_h(h)?, vhat: vhat_at(x, fam, h)? })
}

/// Gradient of `V` by implicit differentiation of the quadric equation:
/// `∂V/∂xᵢ = 2xᵢ / ((H − βᵢ) Σⱼ xⱼ²/(H − βⱼ)² √Π)`.
pub fn implicit_gradient(x: &[f64], fam: &QuadricFamily, prof: &HProfile) -> Result<Vec<f64>> {
    let h = solve_quadric_h(x, fam)?;
    let vhat = vhat_at(x, fam, h)?;
    // −V̂ = 1/(√Π Σ)
    Ok(x
        .iter()
        .zip(fam.betas())
        .map(|(xi, b)| -prof.direction() * 2.0 * xi * vhat / (h - b))
        .collect())
}

/// `Υ(f)(x) = Σ xᵢ ∂f/∂xᵢ` by finite differences.
pub fn euler_operator<F>(field: F, x: &[f64], scheme: &FdScheme) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let g = fd_gradient(field, x, scheme)?;
    Ok(g.iter().zip(x).map(|(a, b)| a * b).sum())
}

/// Integrates `dH/dV = ±√Π(H − βᵢ)` from `H(span.0) = h0`.
pub fn h_profile_flow(prof: &HProfile, h0: f64, span: (f64, f64), tol: f64) -> Result<Trajectory> {
    let fam = prof.family().clone();
    let dir = prof.direction();
    if !(h0 > fam.max_beta()) {
        return Err(Error::Configuration(format!(
            "initial H = {h0} must exceed max beta {}",
            fam.max_beta()
        )));
    }
    ode_solve(
        move |v, y| {
            let p = fam.product(y[0]);
            let gap = fam
                .betas()
                .iter()
                .map(|b| (y[0] - b).abs() / (1.0 + b.abs()))
                .fold(f64::INFINITY, f64::min);
            // H has reached a beta: the flow cannot be continued uniquely
            if p <= 0.0 || gap < 1e-12 {
                return Err(Error::Singularity { at: v, estimate: None });
            }
            Ok(vec![dir * p.sqrt()])
        },
        &[h0],
        span,
        tol,
    )
}

/// The focal parameter of an `n = 2` family: the level sets are confocal
/// conics with foci at `±√(−α)`, `α = C(β₁ − β₂)`.
pub fn n2_alpha(fam: &QuadricFamily) -> Result<f64> {
    match fam.betas() {
        [b1, b2] => Ok(fam.c() * (b1 - b2)),
        _ => Err(Error::Configuration(format!("n = {} is not 2", fam.n()))),
    }
}

/// `Re ln(z + √(z² + α))²` on the branch with `√(z² + α) ≈ z` at infinity,
/// continued inwards along the ray through `z`; single-valued off the focal
/// segment between `±√(−α)`.
pub fn n2_holomorphic_reference(z: Complex64, alpha: f64) -> f64 {
    let g = |w: Complex64| w * w + alpha;
    let size = z.norm();
    if size == 0.0 {
        return alpha.abs().ln();
    }
    let start = z * ((size + 10.0 * (alpha.abs().sqrt() + 1.0)) / size);
    let mut root = g(start).sqrt();
    if (root * start.conj()).re < 0.0 {
        root = -root;
    }
    let root = sqrt_along_segment(g, start, root, z, 512);
    2.0 * (z + root).norm().ln()
}

/// Drifts reported by [`matrix_reduction_check`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct ReductionReport {
    pub zeta0: f64,
    pub zeta_drift: f64,
    pub offdiag_drift: f64,
    pub diag_difference_drift: f64,
    pub triangle_residual: f64,
    pub final_h: f64,
}

/// Integrates `g Ṅ = 1`, `ġ = −½ tr N⁻¹` from `N = diag(H₀ − βᵢ) + offdiag`,
/// `g = (det N)^{-1/2}` and reports conservation of `ζ = g² det N`, of the
/// off-diagonal entries and of the differences `Nᵢᵢ − Nⱼⱼ`, together with the
/// residual of `Ḣ² = Π(H − βᵢ)` (relative to `Π`) on the diagonal.
pub fn matrix_reduction_check(
    fam: &QuadricFamily,
    h0: f64,
    offdiag: f64,
    span: (f64, f64),
    tol: f64,
) -> Result<ReductionReport> {
    let n = fam.n();
    let mut n0 = DMatrix::from_fn(n, n, |i, j| if i == j { h0 - fam.betas()[i] } else { offdiag });
    n0 = 0.5 * (&n0 + n0.transpose());
    let det0 = n0.determinant();
    if !(det0 > 0.0) {
        return Err(Error::Configuration(format!("initial det N = {det0} must be positive")));
    }
    let g0 = det0.powf(-0.5);
    let mut y0: Vec<f64> = n0.iter().copied().collect();
    y0.push(g0);
    let rhs = |v: f64, y: &[f64]| {
        let m = DMatrix::from_column_slice(n, n, &y[..n * n]);
        let g = y[n * n];
        let inv = m.try_inverse().ok_or(Error::Singularity { at: v, estimate: None })?;
        let mut out = vec![0.0; n * n + 1];
        for i in 0..n {
            out[i * n + i] = 1.0 / g;
        }
        out[n * n] = -0.5 * inv.trace();
        Ok(out)
    };
    let tr = ode_solve(rhs, &y0, span, tol)?;
    let zeta0 = g0 * g0 * det0;
    let mut report = ReductionReport {
        zeta0,
        zeta_drift: 0.0,
        offdiag_drift: 0.0,
        diag_difference_drift: 0.0,
        triangle_residual: 0.0,
        final_h: h0,
    };
    for y in tr.states() {
        let m = DMatrix::from_column_slice(n, n, &y[..n * n]);
        let g = y[n * n];
        report.zeta_drift = report.zeta_drift.max((g * g * m.determinant() - zeta0).abs());
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    report.offdiag_drift =
                        report.offdiag_drift.max((m[(i, j)] - n0[(i, j)]).abs());
                    let d = (m[(i, i)] - m[(j, j)]) - (n0[(i, i)] - n0[(j, j)]);
                    report.diag_difference_drift = report.diag_difference_drift.max(d.abs());
                }
            }
        }
        let h = (0..n).map(|i| m[(i, i)] + fam.betas()[i]).sum::<f64>() / n as f64;
        let p = fam.product(h);
        report.triangle_residual = report.triangle_residual.max((1.0 / (g * g) - p).abs() / p);
        report.final_h = h;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eh() -> QuadricFamily {
        QuadricFamily::eguchi_hanson(1.0).unwrap()
    }

    #[test]
    fn roots_of_the_examples() {
        assert!((solve_quadric_h(&[0.0, 0.0, 2.0], &eh()).unwrap() - 4.0).abs() < 1e-12);
        let x = [1.5f64.sqrt(), 0.0, 2f64.sqrt()];
        assert!((solve_quadric_h(&x, &eh()).unwrap() - 4.0).abs() < 1e-12);
        let cone = QuadricFamily::new(vec![1.0, 1.0, 0.0], 0.0).unwrap();
        let h = solve_quadric_h(&[1.0, 1.0, 1.0], &cone).unwrap();
        assert!((h - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn focal_and_sheet_errors() {
        assert!(matches!(solve_quadric_h(&[0.0, 0.0, 0.5], &eh()), Err(Error::FocalSet(_))));
        assert!(matches!(solve_quadric_h(&[0.0, 0.0, 0.0], &eh()), Err(Error::NoSheet(_))));
        let neg = QuadricFamily::new(vec![1.0, 1.0, 0.0], -1.0).unwrap();
        assert!(solve_quadric_h(&[0.0, 0.0, 0.0], &neg).is_err());
    }

    #[test]
    fn v_and_vhat_examples() {
        let prof = HProfile::for_family(&eh());
        let s = sample(&[0.0, 0.0, 2.0], &eh(), &prof).unwrap();
        assert!((s.v + 3f64.ln()).abs() < 1e-10);
        assert!((s.vhat + 2.0 / 3.0).abs() < 1e-14);

        let round = QuadricFamily::new(vec![0.4, 0.4, 0.4], 1.0).unwrap();
        let prof = HProfile::for_family(&round);
        let x = [0.3, -1.1, 0.7];
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s = sample(&x, &round, &prof).unwrap();
        assert!((s.v + 2.0 / r).abs() < 1e-10);
        assert!((s.vhat + 1.0 / r).abs() < 1e-12);
    }

    #[test]
    fn n2_at_max_beta() {
        let fam = QuadricFamily::new(vec![1.0, 0.0], 1.0).unwrap();
        let prof = HProfile::for_family(&fam);
        assert_eq!(prof.reference(), Reference::AtMaxBeta);
        let v = eval_v(&[1.0, 0.0], &fam, &prof).unwrap();
        assert!((v - 2.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-10);
        let reference = n2_holomorphic_reference(Complex64::new(1.0, 0.0), 1.0);
        assert!((v - reference).abs() < 1e-10);
        assert!(HProfile::new(fam, Reference::AtInfinity, 1.0).is_err());
    }

    #[test]
    fn cone_case_uses_simple_beta_below_h() {
        let cone = QuadricFamily::new(vec![1.0, 1.0, 0.0], 0.0).unwrap();
        let prof = HProfile::new(cone.clone(), Reference::AtMaxBeta, 1.0).unwrap();
        let v = eval_v(&[1.0, 1.0, 1.0], &cone, &prof).unwrap();
        // ∫₀^{1/3} dH/((1−H)√H) = 2 artanh(1/√3)
        assert!((v - 2.0 * (1.0 / 3f64.sqrt()).atanh()).abs() < 1e-10);
        let w = eval_v(&[2.0, 2.0, 2.0], &cone, &prof).unwrap();
        assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn euler_operator_examples() {
        let scheme = FdScheme::default();
        let r2 = |p: &[f64]| Ok(p.iter().map(|v| v * v).sum::<f64>());
        let x = [0.3, 0.4, 1.2];
        let u = euler_operator(r2, &x, &scheme).unwrap();
        assert!((u - 2.0 * r2(&x).unwrap()).abs() < 1e-8);
        let prof = HProfile::for_family(&eh()).with_tolerance(1e-13);
        let v = |p: &[f64]| eval_v(p, &eh(), &prof);
        let u = euler_operator(v, &[0.0, 0.0, 2.0], &scheme).unwrap();
        assert!((u - 4.0 / 3.0).abs() < 1e-6, "{u}");
        let k = euler_operator(|_: &[f64]| Ok(5.0), &x, &scheme).unwrap();
        assert_eq!(k, 0.0);
    }

    #[test]
    fn implicit_gradient_matches_fd() {
        let fam = QuadricFamily::new(vec![0.9, 0.35, -0.2], 1.3).unwrap();
        let prof = HProfile::for_family(&fam).with_tolerance(1e-13);
        let x = [0.7, -0.4, 1.1];
        let g = implicit_gradient(&x, &fam, &prof).unwrap();
        let fd = fd_gradient(|p: &[f64]| eval_v(p, &fam, &prof), &x, &FdScheme::default()).unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn profile_flow_examples() {
        let zero = QuadricFamily::new(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let prof = HProfile::for_family(&zero);
        let tr = h_profile_flow(&prof, 4.0, (0.0, 0.5), 1e-12).unwrap();
        // H = 4/(V0 − V)² with H(0) = 4, so V0 = 1
        let h = tr.last()[0];
        assert!((h - 16.0).abs() < 1e-8, "{h}");

        let prof = HProfile::for_family(&eh());
        let tr = h_profile_flow(&prof, 4.0, (0.0, 0.3), 1e-12).unwrap();
        let v0 = prof.v_of_h(4.0).unwrap();
        let v1 = prof.v_of_h(tr.last()[0]).unwrap();
        assert!((v1 - v0 - 0.3).abs() < 1e-8);
        assert!(tr.last()[0] > 4.0);

        // a simple top beta is reached in finite V when H decreases
        let fam = QuadricFamily::new(vec![1.0, 0.5, 0.0], 1.0).unwrap();
        let down = HProfile::new(fam, Reference::AtInfinity, -1.0).unwrap();
        let err = h_profile_flow(&down, 1.5, (0.0, 5.0), 1e-10).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn reduction_conserves_zeta() {
        let r = matrix_reduction_check(&eh(), 4.0, 0.0, (0.0, 0.5), 1e-12).unwrap();
        assert!((r.zeta0 - 1.0).abs() < 1e-14);
        assert!(r.zeta_drift < 1e-9, "{}", r.zeta_drift);
        assert!(r.offdiag_drift == 0.0);
        assert!(r.triangle_residual < 1e-9);
        let r = matrix_reduction_check(&eh(), 4.0, 0.3, (0.0, 0.5), 1e-12).unwrap();
        assert!(r.zeta_drift < 1e-9);
        assert!(r.offdiag_drift < 1e-12);
        assert!(r.diag_difference_drift < 1e-12);
    }
}
