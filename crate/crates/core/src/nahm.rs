//! Euler reduction of the Nahm system on the sphere, Nambu brackets and the
//! Lax pair of the matrix Nahm equations.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{
    fd_gradient, fd_jacobian_vec, integrate_adaptive, ode_solve, Bound, FdScheme, Trajectory,
};

/// Right-hand side of `ẇ₁ = w₂w₃` and cyclic permutations.
pub fn euler_rhs(w: &[f64; 3]) -> [f64; 3] {
    [w[1] * w[2], w[0] * w[2], w[0] * w[1]]
}

/// A one-parameter family `w(s)` feeding the Nahm and metric constructions.
pub trait EulerSource: Send + Sync {
    fn w(&self, s: f64) -> Result<[f64; 3]>;

    /// Derivative of `w`; for genuine Euler flows this is `euler_rhs(w)`.
    fn w_dot(&self, s: f64) -> Result<[f64; 3]> {
        Ok(euler_rhs(&self.w(s)?))
    }

    /// Open interval of admissible parameters.
    fn domain(&self) -> (f64, f64);
}

/// `w₁ = w₂ = a csch(a(s₀ − s))`, `w₃ = a coth(a(s₀ − s))`, so that `A = B = −a²`
/// and `w₃` is the Eguchi-Hanson radius `ρ`.
#[derive(Debug, Clone, Copy)]
pub struct EguchiHansonFlow {
    pub a: f64,
    pub s0: f64,
}

impl EguchiHansonFlow {
    /// The member with `w₃(0) = ρ₀`.
    pub fn from_rho(a: f64, rho0: f64) -> Result<Self> {
        if !(a > 0.0 && rho0 > a) {
            return Err(Error::Domain(format!("need rho0 > a > 0, got a = {a}, rho0 = {rho0}")));
        }
        Ok(Self { a, s0: (a / rho0).atanh() / a })
    }

    /// Parameter at which `w₃ = ρ`.
    pub fn s_of_rho(&self, rho: f64) -> Result<f64> {
        if !(rho > self.a) {
            return Err(Error::Domain(format!("rho = {rho} must exceed a = {}", self.a)));
        }
        Ok(self.s0 - (self.a / rho).atanh() / self.a)
    }
}

impl EulerSource for EguchiHansonFlow {
    fn w(&self, s: f64) -> Result<[f64; 3]> {
        let u = self.a * (self.s0 - s);
        if !(u > 0.0) {
            return Err(Error::Domain(format!("s = {s} is past the blow-up at {}", self.s0)));
        }
        let csch = self.a / u.sinh();
        Ok([csch, csch, self.a / u.tanh()])
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, self.s0)
    }
}

/// `w = (1, 1, 1)/(s₀ − s)`: the flat member, `A = B = 0`.
#[derive(Debug, Clone, Copy)]
pub struct FlatFlow {
    pub s0: f64,
}

impl EulerSource for FlatFlow {
    fn w(&self, s: f64) -> Result<[f64; 3]> {
        if !(s < self.s0) {
            return Err(Error::Domain(format!("s = {s} is past the blow-up at {}", self.s0)));
        }
        let v = 1.0 / (self.s0 - s);
        Ok([v, v, v])
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, self.s0)
    }
}

/// Constant `w`, which is not a solution unless two components vanish.
#[derive(Debug, Clone, Copy)]
pub struct FrozenFlow {
    pub w: [f64; 3],
}

impl EulerSource for FrozenFlow {
    fn w(&self, _s: f64) -> Result<[f64; 3]> {
        Ok(self.w)
    }

    fn w_dot(&self, _s: f64) -> Result<[f64; 3]> {
        Ok([0.0; 3])
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// An integrated Euler flow used as a source (Hermite dense output).
#[derive(Debug, Clone)]
pub struct EulerTrajectory(pub Trajectory);

impl EulerSource for EulerTrajectory {
    fn w(&self, s: f64) -> Result<[f64; 3]> {
        let v = self.0.eval(s)?;
        Ok([v[0], v[1], v[2]])
    }

    fn domain(&self) -> (f64, f64) {
        self.0.span()
    }
}

/// Parameter of the forward blow-up of the Euler flow from `w0`, when
/// `w₁w₂w₃ > 0`: all `|wᵢ|` then grow and
/// `s* = ∫_{|w₃|}^∞ dw / √((w² + A)(w² + B))`.
pub fn blow_up_parameter(w0: [f64; 3], tol: f64) -> Result<Option<f64>> {
    if !(w0[0] * w0[1] * w0[2] > 0.0) {
        return Ok(None);
    }
    let a = w0[0] * w0[0] - w0[2] * w0[2];
    let b = w0[1] * w0[1] - w0[2] * w0[2];
    let start = w0[2].abs();
    let s = integrate_adaptive(
        |w| 1.0 / ((w * w + a) * (w * w + b)).abs().sqrt(),
        start,
        Bound::Infinity,
        tol,
    )?;
    Ok(Some(s))
}

/// Integrates the Euler equations over `span`.
pub fn euler_flow(w0: [f64; 3], span: (f64, f64), tol: f64) -> Result<Trajectory> {
    let rhs = |_: f64, w: &[f64]| Ok(vec![w[1] * w[2], w[0] * w[2], w[0] * w[1]]);
    ode_solve(rhs, &w0, span, tol).map_err(|e| match e {
        Error::Singularity { at, .. } => {
            let estimate = blow_up_parameter(w0, 1e-10).ok().flatten().map(|s| s + span.0);
            Error::Singularity { at, estimate }
        }
        other => other,
    })
}

/// Flow state `(w, s)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EulerFlowState {
    pub w: [f64; 3],
    pub s: f64,
}

/// Elliptic data of a flow state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EllipticInvariants {
    pub a: f64,
    pub b: f64,
    pub beta3: f64,
    pub betas: [f64; 3],
    pub h: f64,
    /// `|(dw₃/ds)² − (w₃² + A)(w₃² + B)|`.
    pub residual: f64,
    /// `|(dH/ds)² − 4Π(H − βᵢ)|`.
    pub h_residual: f64,
}

pub fn elliptic_invariants(state: &EulerFlowState) -> EllipticInvariants {
    elliptic_invariants_with(state, None)
}

/// As [`elliptic_invariants`], but with `A`, `B` (hence the betas) frozen at
/// given values, so that the residuals measure drift along a trajectory.
pub fn elliptic_invariants_with(state: &EulerFlowState, ab: Option<(f64, f64)>) -> EllipticInvariants {
    let [w1, w2, w3] = state.w;
    let (a, b) = ab.unwrap_or((w1 * w1 - w3 * w3, w2 * w2 - w3 * w3));
    let beta3 = (a + b) / 3.0;
    let betas = [beta3 - a, beta3 - b, beta3];
    let h = w3 * w3 + beta3;
    let w3dot = w1 * w2;
    let residual = (w3dot * w3dot - (w3 * w3 + a) * (w3 * w3 + b)).abs();
    let hdot = 2.0 * w3 * w3dot;
    let prod: f64 = betas.iter().map(|bi| h - bi).product();
    let h_residual = (hdot * hdot - 4.0 * prod).abs();
    EllipticInvariants { a, b, beta3, betas, h, residual, h_residual }
}

/// Point `(θ, ψ)` of the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereCoords {
    pub theta: f64,
    pub psi: f64,
}

impl SphereCoords {
    pub fn new(theta: f64, psi: f64) -> Self {
        Self { theta, psi }
    }
}

/// `h = (sinθ sinψ, −sinθ cosψ, cosθ)`.
pub fn sphere_hamiltonians(c: SphereCoords) -> [f64; 3] {
    let (st, ct) = c.theta.sin_cos();
    let (sp, cp) = c.psi.sin_cos();
    [st * sp, -st * cp, ct]
}

const POLE_CLEARANCE: f64 = 1e-2;

/// `{f, g} = ∂f/∂ψ ∂g/∂u − ∂f/∂u ∂g/∂ψ` with `u = cosθ`, by finite differences.
/// This orientation gives `{hᵢ, hⱼ} = εᵢⱼₖ hₖ`.
pub fn poisson_bracket<F, G>(f: F, g: G, c: SphereCoords, scheme: &FdScheme) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    let st = c.theta.sin();
    if st < POLE_CLEARANCE {
        return Err(Error::Pole { theta: c.theta });
    }
    let at = [c.theta, c.psi];
    let df = fd_gradient(|p: &[f64]| Ok(f(p[0], p[1])), &at, scheme)?;
    let dg = fd_gradient(|p: &[f64]| Ok(g(p[0], p[1])), &at, scheme)?;
    // ∂/∂u = −(1/sinθ) ∂/∂θ
    let (f_u, g_u) = (-df[0] / st, -dg[0] / st);
    Ok(df[1] * g_u - f_u * dg[1])
}

/// Angle grid avoiding the poles: `θⱼ = π(j + ½)/m`, `ψₖ = 2πk/m`.
pub fn sphere_grid(m: usize) -> Vec<SphereCoords> {
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            out.push(SphereCoords::new(
                PI * (j as f64 + 0.5) / m as f64,
                2.0 * PI * k as f64 / m as f64,
            ));
        }
    }
    out
}

/// Largest `|ẋᵢ − ½εᵢⱼₖ{xⱼ, xₖ}|` over `samples × grid` for `xᵢ = wᵢ(s) hᵢ`.
pub fn nahm_residual(
    source: &dyn EulerSource,
    samples: &[f64],
    grid: &[SphereCoords],
    scheme: &FdScheme,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &s in samples {
        let w = source.w(s)?;
        let wd = source.w_dot(s)?;
        let local = grid
            .par_iter()
            .map(|&c| {
                let h = sphere_hamiltonians(c);
                let x = |i: usize| {
                    move |th: f64, ps: f64| w[i] * sphere_hamiltonians(SphereCoords::new(th, ps))[i]
                };
                let mut r = 0.0f64;
                for i in 0..3 {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    let br = poisson_bracket(x(j), x(k), c, scheme)?;
                    r = r.max((wd[i] * h[i] - br).abs());
                }
                Ok(r)
            })
            .collect::<Result<Vec<f64>>>()?;
        worst = local.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// Nambu-form residuals at one point.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NambuReport {
    pub residuals: Vec<f64>,
    pub jacobian_det: f64,
    pub degenerate: bool,
}

impl NambuReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// For a map `(V, P₁, …, P_{n−1}) ↦ x ∈ ℝⁿ`, the residuals
/// `∂xᵢ/∂V − (−1)^{i} ∂(x₁…x̂ᵢ…xₙ)/∂(P₁…P_{n−1})` (i counted from 0).
pub fn nambu_residual<F>(x: F, at: &[f64], scheme: &FdScheme) -> Result<NambuReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = at.len();
    let jac = fd_jacobian_vec(x, at, scheme)?;
    if jac.nrows() != n {
        return Err(Error::Configuration(format!(
            "map must have {n} components, got {}",
            jac.nrows()
        )));
    }
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| {
            let row = if r < i { r } else { r + 1 };
            jac[(row, c + 1)]
        });
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        residuals.push(jac[(i, 0)] - sign * minor.determinant());
    }
    let jacobian_det = jac.determinant();
    Ok(NambuReport { residuals, jacobian_det, degenerate: jacobian_det.abs() < 1e-12 })
}

/// `(s, ψ, u) ↦ (w₁h₁, w₂h₂, w₃h₃)` with `u = cosθ`, the chart in which the
/// Nambu form reduces to the Nahm equations.
pub fn nambu_map<'a>(source: &'a dyn EulerSource) -> impl Fn(&[f64]) -> Result<Vec<f64>> + 'a {
    move |p: &[f64]| {
        let w = source.w(p[0])?;
        if !(p[2].abs() < 1.0) {
            return Err(Error::Pole { theta: p[2].clamp(-1.0, 1.0).acos() });
        }
        let h = sphere_hamiltonians(SphereCoords::new(p[2].acos(), p[1]));
        Ok(vec![w[0] * h[0], w[1] * h[1], w[2] * h[2]])
    }
}

/// Three 2×2 complex matrices `X₁, X₂, X₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxPair {
    pub x: [Matrix2<Complex64>; 3],
}

/// `τᵢ = −(i/2)σᵢ`, so that `[τᵢ, τⱼ] = εᵢⱼₖ τₖ`.
pub fn tau(i: usize) -> Matrix2<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let sigma = match i {
        0 => Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        1 => Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        _ => Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    };
    sigma * c(0.0, -0.5)
}

fn commutator(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    a * b - b * a
}

impl LaxPair {
    pub fn zero() -> Self {
        Self { x: [Matrix2::zeros(); 3] }
    }

    /// `Xᵢ = wᵢ τᵢ`.
    pub fn embed(w: [f64; 3]) -> Self {
        Self { x: [tau(0) * Complex64::from(w[0]), tau(1) * Complex64::from(w[1]), tau(2) * Complex64::from(w[2])] }
    }

    /// `A(λ) = (X₁ + iX₂) + 2X₃λ − (X₁ − iX₂)λ²`.
    pub fn a(&self, lambda: Complex64) -> Matrix2<Complex64> {
        let i = Complex64::i();
        let [x1, x2, x3] = &self.x;
        (x1 + x2 * i) + x3 * (lambda * 2.0) - (x1 - x2 * i) * (lambda * lambda)
    }

    /// `B(λ) = −iX₃ + i(X₁ − iX₂)λ`.
    pub fn b(&self, lambda: Complex64) -> Matrix2<Complex64> {
        let i = Complex64::i();
        let [x1, x2, x3] = &self.x;
        x3 * (-i) + (x1 - x2 * i) * (i * lambda)
    }

    /// `Ẋ₁ = [X₂, X₃]` and cyclic.
    pub fn nahm_rhs(&self) -> Self {
        let [x1, x2, x3] = &self.x;
        Self { x: [commutator(x2, x3), commutator(x3, x1), commutator(x1, x2)] }
    }

    fn to_vec(&self) -> Vec<f64> {
        self.x
            .iter()
            .flat_map(|m| m.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect()
    }

    fn from_slice(v: &[f64]) -> Self {
        let m = |k: usize| {
            Matrix2::from_iterator((0..4).map(|j| Complex64::new(v[8 * k + 2 * j], v[8 * k + 2 * j + 1])))
        };
        Self { x: [m(0), m(1), m(2)] }
    }
}

/// Lax residual and spectral drifts along the matrix Nahm flow.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LaxReport {
    pub lambdas: Vec<(f64, f64)>,
    pub lax_residual: f64,
    pub det_drift: Vec<f64>,
    pub trace_sq_drift: Vec<f64>,
    pub max_det_drift: f64,
    pub max_trace_sq_drift: f64,
    pub nodes: usize,
}

/// Default sample points for the spectral parameter.
pub fn default_lambdas() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(-0.3, 0.8),
        Complex64::new(1.2, -0.4),
        Complex64::new(0.0, 2.0),
    ]
}

pub fn lax_spectral_check(
    x0: &LaxPair,
    span: (f64, f64),
    lambdas: &[Complex64],
    tol: f64,
) -> Result<LaxReport> {
    let rhs = |_: f64, y: &[f64]| Ok(LaxPair::from_slice(y).nahm_rhs().to_vec());
    let tr = ode_solve(rhs, &x0.to_vec(), span, tol)?;
    let initial: Vec<(Complex64, Complex64)> = lambdas
        .iter()
        .map(|&l| {
            let a = x0.a(l);
            (a.determinant(), (a * a).trace())
        })
        .collect();
    let mut report = LaxReport {
        lambdas: lambdas.iter().map(|z| (z.re, z.im)).collect(),
        lax_residual: 0.0,
        det_drift: vec![0.0; lambdas.len()],
        trace_sq_drift: vec![0.0; lambdas.len()],
        max_det_drift: 0.0,
        max_trace_sq_drift: 0.0,
        nodes: tr.grid().len(),
    };
    for y in tr.states() {
        let lp = LaxPair::from_slice(y);
        let dot = lp.nahm_rhs();
        for (k, &l) in lambdas.iter().enumerate() {
            let a = lp.a(l);
            let b = lp.b(l);
            let a_dot = dot.a(l);
            let r = (a_dot - commutator(&a, &b)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            report.lax_residual = report.lax_residual.max(r);
            report.det_drift[k] = report.det_drift[k].max((a.determinant() - initial[k].0).norm());
            report.trace_sq_drift[k] =
                report.trace_sq_drift[k].max(((a * a).trace() - initial[k].1).norm());
        }
    }
    report.max_det_drift = report.det_drift.iter().copied().fold(0.0, f64::max);
    report.max_trace_sq_drift = report.trace_sq_drift.iter().copied().fold(0.0, f64::max);
    Ok(report)
}

/// Coefficients of `det A(λ) = c₀ + c₂λ² + c₄λ⁴` for `Xᵢ = wᵢτᵢ`:
/// `c₀ = c₄ = (A − B)/4`, `c₂ = −(A + B)/2`.
pub fn spectral_coefficients(w: [f64; 3]) -> [f64; 3] {
    let a = w[0] * w[0] - w[2] * w[2];
    let b = w[1] * w[1] - w[2] * w[2];
    [(a - b) / 4.0, -(a + b) / 2.0, (a - b) / 4.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_flow_closed_form() {
        let tr = euler_flow([1.0, 1.0, 1.0], (0.0, 0.5), 1e-12).unwrap();
        for v in tr.last() {
            assert!((v - 2.0).abs() < 1e-10);
        }
        assert!((blow_up_parameter([1.0, 1.0, 1.0], 1e-12).unwrap().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eguchi_hanson_family_is_invariant() {
        let rho0: f64 = 2.0;
        let w0 = [(rho0 * rho0 - 1.0).sqrt(), (rho0 * rho0 - 1.0).sqrt(), rho0];
        let eh = EguchiHansonFlow::from_rho(1.0, rho0).unwrap();
        let s_star = blow_up_parameter(w0, 1e-12).unwrap().unwrap();
        assert!((s_star - eh.s0).abs() < 1e-10);
        let tr = euler_flow(w0, (0.0, 0.5 * s_star), 1e-12).unwrap();
        for (s, y) in tr.grid().iter().zip(tr.states()) {
            assert!((y[0] - (y[2] * y[2] - 1.0).sqrt()).abs() < 1e-9);
            let exact = eh.w(*s).unwrap();
            assert!((y[2] - exact[2]).abs() < 1e-9);
        }
        let inv = elliptic_invariants(&EulerFlowState { w: w0, s: 0.0 });
        assert!((inv.a + 1.0).abs() < 1e-14 && (inv.b + 1.0).abs() < 1e-14);
    }

    #[test]
    fn elliptic_examples() {
        let s3 = 3f64.sqrt();
        let inv = elliptic_invariants(&EulerFlowState { w: [s3, s3, 2.0], s: 0.0 });
        assert!(inv.residual < 1e-12);
        assert!(inv.h_residual < 1e-10);
        assert!((inv.h - (4.0 + inv.beta3)).abs() < 1e-14);
        let inv = elliptic_invariants(&EulerFlowState { w: [1.0, 2.0, 3.0], s: 0.0 });
        assert_eq!((inv.a, inv.b), (-8.0, -5.0));
    }

    #[test]
    fn blow_up_reported() {
        let err = euler_flow([1.0, 2.0, 3.0], (0.0, 5.0), 1e-10).unwrap_err();
        match err {
            Error::Singularity { at, estimate: Some(e) } => assert!((at - e).abs() < 1e-3, "{at} {e}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hamiltonians_and_brackets() {
        let h = sphere_hamiltonians(SphereCoords::new(0.0, 1.0));
        assert_eq!(h, [0.0, 0.0, 1.0]);
        let h = sphere_hamiltonians(SphereCoords::new(PI / 2.0, PI / 2.0));
        assert!((h[0] - 1.0).abs() < 1e-15 && h[1].abs() < 1e-15 && h[2].abs() < 1e-15);
        let c = SphereCoords::new(PI / 3.0, 0.7);
        let s = FdScheme::default();
        let hf = |i: usize| move |t: f64, p: f64| sphere_hamiltonians(SphereCoords::new(t, p))[i];
        let b12 = poisson_bracket(hf(0), hf(1), c, &s).unwrap();
        assert!((b12 - 0.5).abs() < 1e-8);
        let b23 = poisson_bracket(hf(1), hf(2), c, &s).unwrap();
        assert!((b23 - sphere_hamiltonians(c)[0]).abs() < 1e-8);
        assert!(poisson_bracket(hf(2), hf(2), c, &s).unwrap().abs() < 1e-12);
        assert!(matches!(
            poisson_bracket(hf(0), hf(1), SphereCoords::new(1e-3, 0.0), &s),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn nahm_residual_flows_and_control() {
        let grid = sphere_grid(8);
        let s = FdScheme::default();
        let eh = EguchiHansonFlow::from_rho(1.0, 2.0).unwrap();
        assert!(nahm_residual(&eh, &[0.0, 0.2], &grid, &s).unwrap() < 1e-8);
        let flat = FlatFlow { s0: 1.0 };
        assert!(nahm_residual(&flat, &[0.0, 0.5], &grid, &s).unwrap() < 1e-8);
        let frozen = FrozenFlow { w: [1.0, 2.0, 3.0] };
        assert!(nahm_residual(&frozen, &[0.0], &grid, &s).unwrap() > 1.0);
    }

    #[test]
    fn nambu_forms() {
        let s = FdScheme::default();
        let eh = EguchiHansonFlow::from_rho(1.0, 2.0).unwrap();
        let r = nambu_residual(nambu_map(&eh), &[0.1, 0.4, 0.3], &s).unwrap();
        assert!(r.max_residual() < 1e-6, "{:?}", r.residuals);
        assert!(!r.degenerate);

        let two = |p: &[f64]| Ok(vec![p[0].exp() * p[1].cos(), p[0].exp() * p[1].sin()]);
        let r = nambu_residual(two, &[0.2, 0.9], &s).unwrap();
        assert!(r.max_residual() < 1e-8);

        let constant = |_: &[f64]| Ok(vec![1.0, 2.0, 3.0]);
        let r = nambu_residual(constant, &[0.0, 0.1, 0.2], &s).unwrap();
        assert!(r.max_residual() == 0.0 && r.degenerate);
        let static_map = |p: &[f64]| Ok(vec![p[1], p[2], p[1] * p[2]]);
        assert!(nambu_residual(static_map, &[0.0, 0.5, 0.2], &s).unwrap().max_residual() > 0.1);
    }

    #[test]
    fn tau_algebra() {
        let c = commutator(&tau(1), &tau(2));
        assert!((c - tau(0)).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn lax_conservation() {
        let r = lax_spectral_check(&LaxPair::embed([1.0, 2.0, 3.0]), (0.0, 0.2), &default_lambdas(), 1e-12)
            .unwrap();
        assert!(r.lax_residual < 1e-12, "{}", r.lax_residual);
        assert!(r.max_det_drift < 1e-9, "{}", r.max_det_drift);
        assert!(r.max_trace_sq_drift < 1e-9);

        let z = lax_spectral_check(&LaxPair::zero(), (0.0, 1.0), &default_lambdas(), 1e-12).unwrap();
        assert_eq!(z.lax_residual, 0.0);
        assert_eq!(z.max_det_drift, 0.0);

        // A = B = 0: det A(λ) ≡ 0
        let flat = LaxPair::embed([1.0, 1.0, 1.0]);
        for l in default_lambdas() {
            assert!(flat.a(l).determinant().norm() < 1e-14);
        }
        assert_eq!(spectral_coefficients([1.0, 1.0, 1.0]), [0.0, 0.0, 0.0]);
        let w = [1.0, 2.0, 3.0];
        let [c0, c2, c4] = spectral_coefficients(w);
        let l = Complex64::new(0.7, 0.2);
        let expect = c0 + c2 * l * l + c4 * l * l * l * l;
        assert!((LaxPair::embed(w).a(l).determinant() - expect).norm() < 1e-12);
    }
}
