//! BGPP and Gibbons-Hawking metrics, their self-dual two-forms, and
//! finite-difference curvature.
//!
//! Angular charts use Euler angles `(θ, φ, ψ)` with
//! `σ₁ = cosψ dθ + sinψ sinθ dφ`, `σ₂ = sinψ dθ − cosψ sinθ dφ`,
//! `σ₃ = dψ + cosθ dφ`, for which `dσ₁ = σ₂∧σ₃` cyclically.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3, Matrix4};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nahm::{sphere_hamiltonians, EulerSource, SphereCoords};
use crate::numerics::{fd_jacobian_vec, integrate_adaptive, Bound, FdScheme};

/// Half-width of the excluded tubes around `θ ∈ {0, π}` and `ρ = a`.
pub const CHART_CLEARANCE: f64 = 1e-2;

type MetricFn = dyn Fn(&[f64; 4]) -> Result<Matrix4<f64>> + Send + Sync;

/// A four-dimensional chart with its metric components.
#[derive(Clone)]
pub struct MetricChart {
    names: [&'static str; 4],
    metric: Arc<MetricFn>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart").field("names", &self.names).finish()
    }
}

impl MetricChart {
    /// `metric` must return a domain error outside the chart.
    pub fn new<F>(names: [&'static str; 4], metric: F) -> Self
    where
        F: Fn(&[f64; 4]) -> Result<Matrix4<f64>> + Send + Sync + 'static,
    {
        Self { names, metric: Arc::new(metric) }
    }

    pub fn names(&self) -> [&'static str; 4] {
        self.names
    }

    /// Metric components; fails off the domain or where `|det g| ≤ 1e-12`.
    pub fn metric(&self, p: &[f64]) -> Result<Matrix4<f64>> {
        let q: [f64; 4] = p
            .try_into()
            .map_err(|_| Error::Configuration(format!("chart point needs 4 coordinates, got {}", p.len())))?;
        let g = (self.metric)(&q)?;
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("metric not finite at {q:?}")));
        }
        if g.determinant().abs() <= 1e-12 {
            return Err(Error::Domain(format!("degenerate metric at {q:?}")));
        }
        Ok(g)
    }

    pub fn in_domain(&self, p: &[f64]) -> bool {
        self.metric(p).is_ok()
    }
}

fn check_angles(theta: f64) -> Result<()> {
    if !(theta > CHART_CLEARANCE && theta < std::f64::consts::PI - CHART_CLEARANCE) {
        return Err(Error::Pole { theta });
    }
    Ok(())
}

/// Rows `σ₁, σ₂, σ₃` in the basis `(dθ, dφ, dψ)`.
pub fn euler_angle_coframe(angles: [f64; 3]) -> Result<Matrix3<f64>> {
    let [theta, _, psi] = angles;
    check_angles(theta)?;
    Ok(coframe_unchecked(theta, psi))
}

fn coframe_unchecked(theta: f64, psi: f64) -> Matrix3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    Matrix3::new(cp, sp * st, 0.0, sp, -cp * st, 0.0, 0.0, ct, 1.0)
}

fn wedge(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| a[i] * b[j] - a[j] * b[i])
}

/// `max |dσᵢ − σⱼ∧σₖ|` over components, with `dσ` by finite differences.
pub fn coframe_structure_residual(angles: [f64; 3], scheme: &FdScheme) -> Result<f64> {
    let field = |p: &[f64]| -> Result<Vec<f64>> {
        Ok(euler_angle_coframe([p[0], p[1], p[2]])?.transpose().iter().copied().collect())
    };
    // row 3i + b holds ∂(σᵢ)_b
    let jac = fd_jacobian_vec(field, &angles, scheme)?;
    let s = euler_angle_coframe(angles)?;
    let row = |i: usize| [s[(i, 0)], s[(i, 1)], s[(i, 2)]];
    let mut worst = 0.0f64;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let w = wedge(&row(j), &row(k));
        for a in 0..3 {
            for b in 0..3 {
                let d = jac[(3 * i + b, a)] - jac[(3 * i + a, b)];
                worst = worst.max((d - w[(a, b)]).abs());
            }
        }
    }
    Ok(worst)
}

/// `f(r) dr² + Σ cᵢ(r) σᵢ²` in coordinates `(r, θ, φ, ψ)`.
fn radial_metric(theta: f64, psi: f64, grr: f64, c: [f64; 3]) -> Matrix4<f64> {
    let s = coframe_unchecked(theta, psi);
    let mut g = Matrix4::zeros();
    g[(0, 0)] = grr;
    for a in 0..3 {
        for b in 0..3 {
            g[(a + 1, b + 1)] = (0..3).map(|i| c[i] * s[(i, a)] * s[(i, b)]).sum();
        }
    }
    g
}

/// `g = w₁w₂w₃ ds² + Σ (wⱼwₖ/wᵢ) σᵢ²` in coordinates `(s, θ, φ, ψ)`, the
/// parameter normalized so that `ẇ₁ = w₂w₃`.
pub fn bgpp_metric(source: Arc<dyn EulerSource>) -> MetricChart {
    MetricChart::new(["s", "theta", "phi", "psi"], move |p| {
        check_angles(p[1])?;
        let w = source_w(source.as_ref(), p[0])?;
        let c = [w[1] * w[2] / w[0], w[0] * w[2] / w[1], w[0] * w[1] / w[2]];
        Ok(radial_metric(p[1], p[3], w[0] * w[1] * w[2], c))
    })
}

fn source_w(source: &dyn EulerSource, s: f64) -> Result<[f64; 3]> {
    let (lo, hi) = source.domain();
    if !(s > lo && s < hi) {
        return Err(Error::Domain(format!("s = {s} outside ({lo}, {hi})")));
    }
    let w = source.w(s)?;
    if w.iter().any(|v| *v == 0.0) {
        return Err(Error::Domain(format!("w vanishes at s = {s}")));
    }
    Ok(w)
}

type TwoFormFn = dyn Fn(&[f64; 4]) -> Result<[Matrix4<f64>; 3]> + Send + Sync;

/// Three two-forms as antisymmetric component matrices.
#[derive(Clone)]
pub struct TwoFormField {
    forms: Arc<TwoFormFn>,
}

impl fmt::Debug for TwoFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TwoFormField")
    }
}

impl TwoFormField {
    pub fn eval(&self, p: &[f64]) -> Result<[Matrix4<f64>; 3]> {
        let q: [f64; 4] = p
            .try_into()
            .map_err(|_| Error::Configuration("two-form point needs 4 coordinates".into()))?;
        (self.forms)(&q)
    }

    /// `max |dΩᵢ|` over components, by finite differences.
    pub fn closure_residual(&self, p: &[f64], scheme: &FdScheme) -> Result<f64> {
        let field = |q: &[f64]| -> Result<Vec<f64>> {
            Ok(self.eval(q)?.iter().flat_map(|m| m.iter().copied().collect::<Vec<_>>()).collect())
        };
        // column-major: entry (a, b) of form i sits in row 16i + 4b + a
        let jac = fd_jacobian_vec(field, p, scheme)?;
        let d = |i: usize, a: usize, b: usize, c: usize| jac[(16 * i + 4 * b + a, c)];
        let mut worst = 0.0f64;
        for i in 0..3 {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    for c in (b + 1)..4 {
                        let v = d(i, b, c, a) + d(i, c, a, b) + d(i, a, b, c);
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// `Ωᵢ = wᵢ σⱼ∧σₖ + wⱼwₖ ds∧σᵢ`; `dΩᵢ = (ẇᵢ − wⱼwₖ) ds∧σⱼ∧σₖ`.
pub fn selfdual_forms_bgpp(source: Arc<dyn EulerSource>) -> TwoFormField {
    let forms = move |p: &[f64; 4]| -> Result<[Matrix4<f64>; 3]> {
        check_angles(p[1])?;
        let w = source_w(source.as_ref(), p[0])?;
        let s = coframe_unchecked(p[1], p[3]);
        let one = |i: usize| -> [f64; 4] { [0.0, s[(i, 0)], s[(i, 1)], s[(i, 2)]] };
        let ds = [1.0, 0.0, 0.0, 0.0];
        let mut out = [Matrix4::zeros(); 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let a = wedge(&one(j), &one(k));
            let b = wedge(&ds, &one(i));
            out[i] = Matrix4::from_fn(|r, c| w[i] * a[(r, c)] + w[j] * w[k] * b[(r, c)]);
        }
        Ok(out)
    };
    TwoFormField { forms: Arc::new(forms) }
}

type ScalarFn = dyn Fn(&[f64; 3]) -> Result<f64> + Send + Sync;
type VectorFn = dyn Fn(&[f64; 3]) -> Result<[f64; 3]> + Send + Sync;

/// Potential `V̂` and connection `A` of a Gibbons-Hawking metric.
#[derive(Clone)]
pub struct GHData {
    vhat: Arc<ScalarFn>,
    a: Arc<VectorFn>,
}

impl fmt::Debug for GHData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GHData")
    }
}

impl GHData {
    pub fn new<V, A>(vhat: V, a: A) -> Self
    where
        V: Fn(&[f64; 3]) -> Result<f64> + Send + Sync + 'static,
        A: Fn(&[f64; 3]) -> Result<[f64; 3]> + Send + Sync + 'static,
    {
        Self { vhat: Arc::new(vhat), a: Arc::new(a) }
    }

    /// `V̂ = c₀`, `A = 0`.
    pub fn constant(c0: f64) -> Self {
        Self::new(move |_| Ok(c0), |_| Ok([0.0; 3]))
    }

    /// `V̂ = c₀ + Σ mⱼ/|x − pⱼ|` with Dirac strings running down from each
    /// centre: `A = −Σ mⱼ (1 − (z − zⱼ)/|x − pⱼ|) ((x − xⱼ)dy − (y − yⱼ)dx)/ρⱼ²`.
    pub fn multi_center(c0: f64, centers: Vec<([f64; 3], f64)>) -> Self {
        let centers = Arc::new(centers);
        let cv = Arc::clone(&centers);
        let vhat = move |x: &[f64; 3]| -> Result<f64> {
            let mut v = c0;
            for (p, m) in cv.iter() {
                let d = dist(x, p);
                if d == 0.0 {
                    return Err(Error::Domain(format!("{x:?} is a centre")));
                }
                v += m / d;
            }
            Ok(v)
        };
        let a = move |x: &[f64; 3]| -> Result<[f64; 3]> {
            let mut out = [0.0; 3];
            for (p, m) in centers.iter() {
                let (dx, dy, dz) = (x[0] - p[0], x[1] - p[1], x[2] - p[2]);
                let rho2 = dx * dx + dy * dy;
                let d = dist(x, p);
                if d == 0.0 {
                    return Err(Error::Domain(format!("{x:?} is a centre")));
                }
                // (1 − cos ϑ)/ρ², cancellation-free above the centre
                let g = if dz >= 0.0 {
                    1.0 / (d * (d + dz))
                } else if rho2 == 0.0 {
                    return Err(Error::Domain(format!("{x:?} lies on a Dirac string")));
                } else {
                    (1.0 - dz / d) / rho2
                };
                out[0] += m * g * dy;
                out[1] -= m * g * dx;
            }
            Ok(out)
        };
        Self::new(vhat, a)
    }

    /// The two-centre potential `1/|x + a e₃| + 1/|x − a e₃|`.
    pub fn eguchi_hanson(a: f64) -> Self {
        Self::multi_center(0.0, vec![([0.0, 0.0, -a], 1.0), ([0.0, 0.0, a], 1.0)])
    }

    pub fn vhat(&self, x: &[f64; 3]) -> Result<f64> {
        (self.vhat)(x)
    }

    pub fn a(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        (self.a)(x)
    }

    /// `max |∇×A − ∇V̂|` by finite differences.
    pub fn monopole_residual(&self, x: &[f64; 3], scheme: &FdScheme) -> Result<f64> {
        let field = |p: &[f64]| -> Result<Vec<f64>> {
            let q = [p[0], p[1], p[2]];
            let a = self.a(&q)?;
            Ok(vec![self.vhat(&q)?, a[0], a[1], a[2]])
        };
        let jac = fd_jacobian_vec(field, x, scheme)?;
        let mut worst = 0.0f64;
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let curl = jac[(1 + k, j)] - jac[(1 + j, k)];
            worst = worst.max((curl - jac[(0, i)]).abs());
        }
        Ok(worst)
    }
}

fn dist(x: &[f64; 3], p: &[f64; 3]) -> f64 {
    ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2) + (x[2] - p[2]).powi(2)).sqrt()
}

/// `A_φ(r, θ) = ∫₀^θ r² sinθ′ ∂ᵣV̂(r, θ′) dθ′` for an axisymmetric `V̂`, the
/// axial gauge regular on the positive `x₃` axis. `dvhat_dr` receives `(r, θ)`.
pub fn axial_gauge_a_phi<F>(dvhat_dr: F, r: f64, theta: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if theta == 0.0 {
        return Ok(0.0);
    }
    let f = |t: f64| r * r * t.sin() * dvhat_dr(r, t);
    integrate_adaptive(f, 0.0, Bound::Finite(theta), tol)
}

/// `g = V̂ (dx₁² + dx₂² + dx₃²) + V̂⁻¹ (dT + A)²` in coordinates `(x₁, x₂, x₃, T)`.
pub fn gh_metric(data: GHData) -> MetricChart {
    MetricChart::new(["x1", "x2", "x3", "T"], move |p| {
        let x = [p[0], p[1], p[2]];
        let v = data.vhat(&x)?;
        if v == 0.0 {
            return Err(Error::ZeroPotential(x));
        }
        let a = data.a(&x)?;
        let mut g = Matrix4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                g[(i, j)] = a[i] * a[j] / v + if i == j { v } else { 0.0 };
            }
            g[(i, 3)] = a[i] / v;
            g[(3, i)] = a[i] / v;
        }
        g[(3, 3)] = 1.0 / v;
        Ok(g)
    })
}

/// A BGPP point in Gibbons-Hawking form.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GhPoint {
    pub x: [f64; 3],
    pub t: f64,
    /// `g(K, K)` for `K = ∂/∂T`, i.e. `∂/∂φ` at fixed `(s, θ, ψ)`.
    pub kk: f64,
}

/// `xᵢ = wᵢ(s) hᵢ(θ, ψ)`, `T = φ + ψ`, and `g(K, K) = Σ (wⱼwₖ/wᵢ) hᵢ²`.
pub fn to_gh_coordinates(source: &dyn EulerSource, angles: [f64; 3], s: f64) -> Result<GhPoint> {
    let [theta, phi, psi] = angles;
    check_angles(theta)?;
    let w = source_w(source, s)?;
    let h = sphere_hamiltonians(SphereCoords::new(theta, psi));
    let kk = (0..3)
        .map(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            w[j] * w[k] / w[i] * h[i] * h[i]
        })
        .sum();
    Ok(GhPoint { x: [w[0] * h[0], w[1] * h[1], w[2] * h[2]], t: phi + psi, kk })
}

/// Curvature at one point.
#[derive(Debug, Clone, Serialize)]
pub struct Curvature {
    pub ricci: [[f64; 4]; 4],
    pub max_abs: f64,
    /// Largest `|R^a_bcd|`.
    pub riemann_max_abs: f64,
    pub scalar: f64,
}

/// The default curvature scheme: step `1e-3`, second order, one Richardson pass.
pub fn curvature_scheme() -> FdScheme {
    FdScheme::new(1e-3, 2, true).expect("valid scheme")
}

/// Reports a stencil that left the chart as a domain error.
fn stencil_domain(err: Error) -> Error {
    fn root(e: &Error) -> &Error {
        match e {
            Error::Stencil { source, .. } => root(source),
            other => other,
        }
    }
    if let Error::Stencil { at, .. } = &err {
        if let inner @ (Error::Domain(_) | Error::Pole { .. }) = root(&err) {
            return Error::Domain(format!("FD stencil at {at:?} leaves the chart: {inner}"));
        }
    }
    err
}

fn christoffel(chart: &MetricChart, p: &[f64], scheme: &FdScheme) -> Result<Vec<f64>> {
    let g = chart.metric(p)?;
    let ginv = g.try_inverse().ok_or_else(|| Error::Domain(format!("singular metric at {p:?}")))?;
    let dg = fd_jacobian_vec(|q: &[f64]| Ok(chart.metric(q)?.iter().copied().collect()), p, scheme)?;
    // column-major: g_ij sits in row 4j + i
    let d = |i: usize, j: usize, k: usize| dg[(4 * j + i, k)];
    let mut gam = vec![0.0; 64];
    for a in 0..4 {
        for b in 0..4 {
            for c in b..4 {
                let v: f64 = (0..4)
                    .map(|e| 0.5 * ginv[(a, e)] * (d(e, c, b) + d(e, b, c) - d(b, c, e)))
                    .sum();
                gam[16 * a + 4 * b + c] = v;
                gam[16 * a + 4 * c + b] = v;
            }
        }
    }
    Ok(gam)
}

/// Christoffel symbols by finite differences of the metric, Riemann by finite
/// differences of the Christoffel symbols, Ricci by contraction.
pub fn ricci_fd(chart: &MetricChart, point: &[f64; 4], scheme: &FdScheme) -> Result<Curvature> {
    let run = || -> Result<Curvature> {
        let gam = christoffel(chart, point, scheme)?;
        let dgam = fd_jacobian_vec(|q: &[f64]| christoffel(chart, q, scheme), point, scheme)?;
        let gm = |a: usize, b: usize, c: usize| gam[16 * a + 4 * b + c];
        let dg = |a: usize, b: usize, c: usize, e: usize| dgam[(16 * a + 4 * b + c, e)];
        let mut ricci = [[0.0; 4]; 4];
        let mut riemann_max = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut r = dg(a, d, b, c) - dg(a, c, b, d);
                        for e in 0..4 {
                            r += gm(a, c, e) * gm(e, d, b) - gm(a, d, e) * gm(e, c, b);
                        }
                        riemann_max = riemann_max.max(r.abs());
                        if a == c {
                            ricci[b][d] += r;
                        }
                    }
                }
            }
        }
        let ginv = chart.metric(point)?.try_inverse().expect("checked in christoffel");
        let scalar = (0..4).flat_map(|b| (0..4).map(move |d| (b, d))).map(|(b, d)| ginv[(b, d)] * ricci[b][d]).sum();
        let max_abs = ricci.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Curvature { ricci, max_abs, riemann_max_abs: riemann_max, scalar })
    };
    run().map_err(stencil_domain)
}

/// [`ricci_fd`] over many points in parallel, in input order.
pub fn ricci_scan(chart: &MetricChart, points: &[[f64; 4]], scheme: &FdScheme) -> Result<Vec<Curvature>> {
    points.par_iter().map(|p| ricci_fd(chart, p, scheme)).collect()
}

/// `ρ/(ρ² − a²) dρ² + ρ(σ₁² + σ₂²) + ((ρ² − a²)/ρ) σ₃²` on `ρ > a`.
pub fn eguchi_hanson_chart(a: f64) -> Result<MetricChart> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Configuration(format!("a must be positive, got {a}")));
    }
    Ok(MetricChart::new(["rho", "theta", "phi", "psi"], move |p| {
        let rho = p[0];
        if !(rho - a > CHART_CLEARANCE * a) {
            return Err(Error::Domain(format!("rho = {rho} must exceed a = {a}")));
        }
        check_angles(p[1])?;
        let q = rho * rho - a * a;
        Ok(radial_metric(p[1], p[3], rho / q, [rho, rho, q / rho]))
    }))
}

/// Flat space as `dR² + (R²/4) Σ σᵢ²`.
pub fn flat_chart() -> MetricChart {
    MetricChart::new(["R", "theta", "phi", "psi"], |p| {
        if !(p[0] > CHART_CLEARANCE) {
            return Err(Error::Domain(format!("R = {} too close to the origin", p[0])));
        }
        check_angles(p[1])?;
        let c = 0.25 * p[0] * p[0];
        Ok(radial_metric(p[1], p[3], 1.0, [c, c, c]))
    })
}

/// The unit four-sphere `dχ² + (sin²χ/4) Σ σᵢ²`, with `Ric = 3g`.
pub fn four_sphere_chart() -> MetricChart {
    MetricChart::new(["chi", "theta", "phi", "psi"], |p| {
        let chi = p[0];
        if !(chi > CHART_CLEARANCE && chi < std::f64::consts::PI - CHART_CLEARANCE) {
            return Err(Error::Domain(format!("chi = {chi} outside the chart")));
        }
        check_angles(p[1])?;
        let c = 0.25 * chi.sin().powi(2);
        Ok(radial_metric(p[1], p[3], 1.0, [c, c, c]))
    })
}

/// Closed forms of the two-centre example.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EhReference {
    pub v: f64,
    pub vhat: f64,
    pub ellipsoid_residual: f64,
}

/// `V = −(2/a) arccoth((|r + a| + |r − a|)/(2a))`, `V̂ = 1/|r + a| + 1/|r − a|`,
/// with `r ± a` short for `r ± a e₃`.
pub fn eguchi_hanson_reference(r: &[f64; 3], a: f64) -> Result<EhReference> {
    if !(a > 0.0) {
        return Err(Error::Configuration(format!("a must be positive, got {a}")));
    }
    let dp = dist(r, &[0.0, 0.0, -a]);
    let dm = dist(r, &[0.0, 0.0, a]);
    let q = (dp + dm) / (2.0 * a);
    if dp == 0.0 || dm == 0.0 || q - 1.0 < 1e-14 {
        return Err(Error::FocalSet(format!("{r:?} lies on the focal segment")));
    }
    let v = -(2.0 / a) * 0.5 * ((q + 1.0) / (q - 1.0)).ln();
    let k = 1.0 / (a * v / 2.0).tanh();
    let res = (r[0] * r[0] + r[1] * r[1]) / (a * a * (k * k - 1.0)) + r[2] * r[2] / (a * a * k * k) - 1.0;
    Ok(EhReference { v, vhat: 1.0 / dp + 1.0 / dm, ellipsoid_residual: res.abs() })
}
