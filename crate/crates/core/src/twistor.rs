//! Contour-integral transforms for the Laplace equation in three dimensions.
//!
//! A point `x` corresponds to the section `μ(λ) = (x₁ + ix₂) + 2x₃λ − (x₁ − ix₂)λ²`.
//! Integrals are taken over circles either in the `λ` chart or in the
//! inverted chart `λ̃ = 1/λ`, the latter whenever the enclosed root is large
//! or sits at infinity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{contour_integral, fd_jacobian_vec, fd_laplacian, Contour, FdScheme, TrackedLog};

type C64 = Complex64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `μ(λ)` for the point `x`.
pub fn incidence_mu(x: &[f64; 3], lambda: C64) -> C64 {
    c(x[0], x[1]) + lambda * (2.0 * x[2]) - c(x[0], -x[1]) * lambda * lambda
}

/// Roots of `μ(λ)`; `None` stands for `λ = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionRoots {
    pub plus: Option<C64>,
    pub minus: Option<C64>,
    pub r: f64,
}

/// `λ± = (x₃ ± r)/(x₁ − ix₂)`, evaluated in the cancellation-free form on
/// each half-space. On the `x₃` axis the section drops degree and one root
/// moves to infinity.
pub fn section_roots(x: &[f64; 3]) -> Result<SectionRoots> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return Err(Error::Domain("the section of the origin vanishes identically".into()));
    }
    let zb = c(x[0], -x[1]);
    let z = c(x[0], x[1]);
    let ratio = |num: C64, den: C64| if den == c(0.0, 0.0) { None } else { Some(num / den) };
    let (plus, minus) = if x[2] >= 0.0 {
        (ratio(c(x[2] + r, 0.0), zb), ratio(-z, c(x[2] + r, 0.0)))
    } else {
        (ratio(-z, c(x[2] - r, 0.0)), ratio(c(x[2] - r, 0.0), zb))
    };
    Ok(SectionRoots { plus, minus, r })
}

fn mu_degree(x: &[f64; 3]) -> i32 {
    if x[0] != 0.0 || x[1] != 0.0 {
        2
    } else if x[2] != 0.0 {
        1
    } else {
        0
    }
}

/// Cohomological weight of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `F`, homogeneous of degree −2; fed to the Penrose transform.
    #[serde(rename = "F")]
    WeightMinusTwo,
    /// `f`, homogeneous of degree 0; fed to the splitting and the Φ matrix.
    #[serde(rename = "f")]
    WeightZero,
}

/// Twistor functions with known singularity structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Kernel {
    /// `F = 1/μ`.
    InvMu,
    /// `f = −ln μ` (principal branch when evaluated pointwise).
    NegLogMu,
    /// `f = μ/λ`.
    MuOverLambda,
    Zero { kind: KernelKind },
    /// `N(λ) μ^{−mu_power} / Π(λ − pⱼ)` with complex coefficients `[re, im]`
    /// in ascending order of `λ`.
    Rational {
        numerator: Vec<[f64; 2]>,
        mu_power: i32,
        #[serde(default)]
        lambda_poles: Vec<[f64; 2]>,
        kind: KernelKind,
    },
}

impl Kernel {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Configuration(format!("kernel: {e}")))
    }

    /// Built-in kernels by name.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "inv-mu" => Ok(Kernel::InvMu),
            "neg-log-mu" => Ok(Kernel::NegLogMu),
            "mu-over-lambda" => Ok(Kernel::MuOverLambda),
            "zero-F" => Ok(Kernel::Zero { kind: KernelKind::WeightMinusTwo }),
            "zero-f" => Ok(Kernel::Zero { kind: KernelKind::WeightZero }),
            other => Err(Error::Configuration(format!("unknown kernel {other}"))),
        }
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::InvMu => KernelKind::WeightMinusTwo,
            Kernel::NegLogMu | Kernel::MuOverLambda => KernelKind::WeightZero,
            Kernel::Zero { kind } | Kernel::Rational { kind, .. } => *kind,
        }
    }

    fn poles(&self) -> Vec<C64> {
        match self {
            Kernel::MuOverLambda => vec![c(0.0, 0.0)],
            Kernel::Rational { lambda_poles, .. } => {
                lambda_poles.iter().map(|p| c(p[0], p[1])).collect()
            }
            _ => Vec::new(),
        }
    }

    fn rational_parts(&self, lambda: C64) -> (C64, i32) {
        match self {
            Kernel::Rational { numerator, mu_power, lambda_poles, .. } => {
                let num = numerator.iter().rev().fold(c(0.0, 0.0), |acc, k| acc * lambda + c(k[0], k[1]));
                let den: C64 = lambda_poles.iter().map(|p| lambda - c(p[0], p[1])).product();
                (num / den, *mu_power)
            }
            _ => (c(0.0, 0.0), 0),
        }
    }

    /// Value at `(λ, μ)`.
    pub fn eval(&self, lambda: C64, mu: C64) -> C64 {
        match self {
            Kernel::InvMu => 1.0 / mu,
            Kernel::NegLogMu => -mu.ln(),
            Kernel::MuOverLambda => mu / lambda,
            Kernel::Zero { .. } => c(0.0, 0.0),
            Kernel::Rational { .. } => {
                let (q, k) = self.rational_parts(lambda);
                q * mu.powi(-k)
            }
        }
    }

    /// Analytic `∂/∂μ`.
    pub fn d_mu(&self, lambda: C64, mu: C64) -> C64 {
        match self {
            Kernel::InvMu => -1.0 / (mu * mu),
            Kernel::NegLogMu => -1.0 / mu,
            Kernel::MuOverLambda => 1.0 / lambda,
            Kernel::Zero { .. } => c(0.0, 0.0),
            Kernel::Rational { .. } => {
                let (q, k) = self.rational_parts(lambda);
                if k == 0 {
                    c(0.0, 0.0)
                } else {
                    q * (-k as f64) * mu.powi(-k - 1)
                }
            }
        }
    }

    /// `∂/∂μ` by the Cauchy integral over a small circle in `μ`; used to
    /// cross-check [`Kernel::d_mu`].
    pub fn d_mu_numeric(&self, lambda: C64, mu: C64) -> Result<C64> {
        let radius = 1e-2 * mu.norm().max(1e-3);
        let circle = Contour::new(mu, radius, 32)?;
        let v = contour_integral(|m| self.eval(lambda, m) / ((m - mu) * (m - mu)), &circle)?;
        Ok(v / (2.0 * PI * C64::i()))
    }

    /// Powers of `μ` in the denominators of `(F, μ∂F/∂μ)` or `∂f/∂μ`.
    fn mu_exponent(&self, integrand: Integrand) -> i32 {
        let base = match self {
            Kernel::InvMu => 1,
            Kernel::NegLogMu => 0,
            Kernel::MuOverLambda | Kernel::Zero { .. } => -1,
            Kernel::Rational { mu_power, .. } => *mu_power,
        };
        match integrand {
            Integrand::Value | Integrand::Dilation => base,
            Integrand::MuDerivative => {
                if base == -1 && !matches!(self, Kernel::Rational { .. }) {
                    0
                } else if let Kernel::Rational { mu_power: 0, .. } = self {
                    0
                } else {
                    base + 1
                }
            }
        }
    }

    /// Degree in `λ` of the extra factor (numerator over poles).
    fn lambda_degree(&self) -> i32 {
        match self {
            Kernel::InvMu | Kernel::NegLogMu => 0,
            Kernel::MuOverLambda => -1,
            Kernel::Zero { .. } => i32::MIN / 4,
            Kernel::Rational { numerator, lambda_poles, .. } => {
                let deg = numerator.iter().rposition(|k| k[0] != 0.0 || k[1] != 0.0);
                match deg {
                    Some(d) => d as i32 - lambda_poles.len() as i32,
                    None => i32::MIN / 4,
                }
            }
        }
    }
}

/// Which function of the kernel is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Integrand {
    Value,
    Dilation,
    MuDerivative,
}

/// Coordinate chart of a contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    Lambda,
    /// `λ̃ = 1/λ`; `∮ G(λ) dλ = ∮ −G(1/λ̃)/λ̃² dλ̃`.
    Inverted,
}

/// A circle in one of the two charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistorContour {
    pub chart: Chart,
    pub circle: Contour,
}

impl TwistorContour {
    pub fn lambda(center: C64, radius: f64) -> Result<Self> {
        Ok(Self { chart: Chart::Lambda, circle: Contour::circle(center, radius)? })
    }

    pub fn inverted(center: C64, radius: f64) -> Result<Self> {
        Ok(Self { chart: Chart::Inverted, circle: Contour::circle(center, radius)? })
    }

    /// `∮ G(λ) dλ` along this contour.
    pub fn integrate(&self, g: impl Fn(C64) -> C64) -> Result<C64> {
        match self.chart {
            Chart::Lambda => contour_integral(g, &self.circle),
            Chart::Inverted => contour_integral(|t| -g(1.0 / t) / (t * t), &self.circle),
        }
    }

    fn to_chart(&self, s: Option<C64>) -> Option<C64> {
        match (self.chart, s) {
            (Chart::Lambda, s) => s,
            (Chart::Inverted, None) => Some(c(0.0, 0.0)),
            (Chart::Inverted, Some(z)) if z == c(0.0, 0.0) => None,
            (Chart::Inverted, Some(z)) => Some(1.0 / z),
        }
    }
}

/// Singular points of an integrand in the `λ` sphere (`None` = ∞).
#[derive(Debug, Clone)]
struct Singularities {
    mu_roots: Vec<Option<C64>>,
    others: Vec<Option<C64>>,
}

impl Singularities {
    fn all(&self) -> Vec<Option<C64>> {
        self.mu_roots.iter().chain(&self.others).copied().collect()
    }
}

fn singularities(kernel: &Kernel, x: &[f64; 3], which: Integrand, extra_lambda: i32) -> Result<Singularities> {
    let roots = section_roots(x)?;
    let k = kernel.mu_exponent(which);
    let mu_roots = if k > 0 { vec![roots.plus, roots.minus] } else { Vec::new() };
    let mut others: Vec<Option<C64>> = kernel.poles().into_iter().map(Some).collect();
    // behaviour at infinity: the integrand grows like λ^d, and −G(1/λ̃)/λ̃²
    // is regular at λ̃ = 0 only when d ≤ −2
    let d = kernel.lambda_degree() + extra_lambda - k.max(0) * mu_degree(x) + if k < 0 { -k * mu_degree(x) } else { 0 };
    let infinity_is_root = mu_roots.contains(&None);
    if d >= -1 && !infinity_is_root && kernel.lambda_degree() > i32::MIN / 8 {
        others.push(None);
    }
    Ok(Singularities { mu_roots, others })
}

fn place_around(target: Option<C64>, others: &[Option<C64>]) -> Result<TwistorContour> {
    let in_lambda = matches!(target, Some(z) if z.norm() <= 1.0);
    let chart = if in_lambda { Chart::Lambda } else { Chart::Inverted };
    let probe = TwistorContour { chart, circle: Contour::circle(c(0.0, 0.0), 1.0)? };
    let center = probe.to_chart(target).expect("target is finite in its chart");
    let mut radius = f64::INFINITY;
    for s in others {
        if *s == target {
            continue;
        }
        if let Some(z) = probe.to_chart(*s) {
            radius = radius.min(0.5 * (z - center).norm());
        }
    }
    if radius == 0.0 {
        return Err(Error::Contour("two singularities coincide; no separating circle".into()));
    }
    if !radius.is_finite() {
        radius = 1.0;
    }
    Ok(TwistorContour { chart, circle: Contour::circle(center, radius)? })
}

/// Origin-centred circle in the inverted chart enclosing `1/λ₊` and `λ̃ = 0`
/// but no other singular point; `None` when `|λ₊| ≤ 1` or no such circle exists.
fn around_root_and_infinity(target: Option<C64>, others: &[Option<C64>]) -> Result<Option<TwistorContour>> {
    let inner = match target {
        None => 0.0,
        Some(z) if z.norm() > 1.0 => 1.0 / z.norm(),
        Some(_) => return Ok(None),
    };
    let mut outer = f64::INFINITY;
    for s in others {
        match s {
            Some(z) if *s != target && *z != c(0.0, 0.0) => outer = outer.min(1.0 / z.norm()),
            _ => {}
        }
    }
    if outer <= inner {
        return Ok(None);
    }
    let radius = match (inner > 0.0, outer.is_finite()) {
        (true, true) => (inner * outer).sqrt(),
        (true, false) => 2.0 * inner,
        (false, true) => 0.5 * outer,
        (false, false) => 1.0,
    };
    Ok(Some(TwistorContour::inverted(c(0.0, 0.0), radius)?))
}

/// Circle enclosing the root `λ₊` of `μ` and nothing else, or, for integrands
/// without `μ`-singularities, the origin-centred circle enclosing every finite
/// `λ`-pole.
fn auto_contour_for(kernel: &Kernel, x: &[f64; 3], which: Integrand) -> Result<TwistorContour> {
    let sing = singularities(kernel, x, which, 0)?;
    if !sing.mu_roots.is_empty() {
        let target = section_roots(x)?.plus;
        let mut others = sing.all();
        if which == Integrand::MuDerivative {
            // λ·g may have a pole at infinity; for |λ₊| > 1 it is enclosed
            // together with λ₊, which keeps A regular on the positive axis
            if let Some(tc) = around_root_and_infinity(target, &others)? {
                return Ok(tc);
            }
            others.extend(singularities(kernel, x, which, 1)?.others);
        }
        return place_around(target, &others);
    }
    let finite: Vec<C64> = sing.others.iter().flatten().copied().collect();
    let reach = finite.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let radius = if reach == 0.0 { 1.0 } else { 2.0 * reach };
    TwistorContour::lambda(c(0.0, 0.0), radius)
}

/// Default contour for the Penrose and dilation transforms of `kernel` at `x`.
pub fn auto_contour(kernel: &Kernel, x: &[f64; 3]) -> Result<TwistorContour> {
    let which = match kernel.kind() {
        KernelKind::WeightMinusTwo => Integrand::Value,
        KernelKind::WeightZero => Integrand::MuDerivative,
    };
    auto_contour_for(kernel, x, which)
}

/// Fails when a singularity of the integrand lies within `1e-3·R` of the circle.
fn check_clearance(sing: &Singularities, tc: &TwistorContour) -> Result<()> {
    let tol = 1e-3 * tc.circle.radius();
    for s in sing.all() {
        if let Some(z) = tc.to_chart(s) {
            let d = tc.circle.distance_to(z);
            if d < tol {
                return Err(Error::Contour(format!(
                    "singularity at distance {d:e} from the contour (radius {})",
                    tc.circle.radius()
                )));
            }
        }
    }
    Ok(())
}

fn require_kind(kernel: &Kernel, kind: KernelKind) -> Result<()> {
    if kernel.kind() != kind {
        return Err(Error::Configuration(format!("kernel {kernel:?} has the wrong weight")));
    }
    Ok(())
}

/// `V(x) = ∮ F(λ, μ(λ)) dλ`.
pub fn penrose_transform(kernel: &Kernel, x: &[f64; 3], tc: &TwistorContour) -> Result<C64> {
    require_kind(kernel, KernelKind::WeightMinusTwo)?;
    check_clearance(&singularities(kernel, x, Integrand::Value, 0)?, tc)?;
    tc.integrate(|l| kernel.eval(l, incidence_mu(x, l)))
}

/// `V̂(x) = ∮ μ ∂F/∂μ dλ`, the transform of the dilation of `F`.
pub fn dilation_transform(kernel: &Kernel, x: &[f64; 3], tc: &TwistorContour) -> Result<C64> {
    require_kind(kernel, KernelKind::WeightMinusTwo)?;
    check_clearance(&singularities(kernel, x, Integrand::Dilation, 0)?, tc)?;
    tc.integrate(|l| {
        let mu = incidence_mu(x, l);
        mu * kernel.d_mu(l, mu)
    })
}

/// Splitting of `∂f/∂μ` at one point of the overlap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Splitting {
    pub h0: [C64; 2],
    pub h1: [C64; 2],
    /// `|(h₀ − h₁) − (λ, 1)·∂f/∂μ|`.
    pub difference_residual: f64,
    /// `π·h₀ = λ h₀¹ − h₀⁰` with `π = (λ, 1)`.
    pub pi_h0: C64,
    pub pi_h1: C64,
}

/// `h_α(λ) = (1/2πi) ∮_{Γα} (λ′, 1) ∂f/∂μ(λ′) / (λ′ − λ) dλ′` for two circles
/// in the `λ` chart, `λ` lying inside `Γ₀` and outside `Γ₁`.
pub fn splitting(
    kernel: &Kernel,
    x: &[f64; 3],
    lambda: C64,
    contours: (&Contour, &Contour),
) -> Result<Splitting> {
    require_kind(kernel, KernelKind::WeightZero)?;
    let (outer, inner) = contours;
    if !outer.encloses(lambda) || inner.encloses(lambda) {
        return Err(Error::Contour("λ must lie between the two contours".into()));
    }
    let sing = singularities(kernel, x, Integrand::MuDerivative, 1)?;
    for tc in [outer, inner] {
        check_clearance(&sing, &TwistorContour { chart: Chart::Lambda, circle: *tc })?;
    }
    for s in sing.all().into_iter().flatten() {
        if outer.encloses(s) && !inner.encloses(s) {
            return Err(Error::Contour(format!("singularity {s} lies in the overlap annulus")));
        }
    }
    let g = |l: C64| kernel.d_mu(l, incidence_mu(x, l));
    let two_pi_i = 2.0 * PI * C64::i();
    let h = |circle: &Contour| -> Result<[C64; 2]> {
        let h0 = contour_integral(|l| l * g(l) / (l - lambda), circle)? / two_pi_i;
        let h1 = contour_integral(|l| g(l) / (l - lambda), circle)? / two_pi_i;
        Ok([h0, h1])
    };
    let h0 = h(outer)?;
    let h1 = h(inner)?;
    let gl = g(lambda);
    let diff = ((h0[0] - h1[0] - lambda * gl).norm()).max((h0[1] - h1[1] - gl).norm());
    let pi = |v: [C64; 2]| lambda * v[1] - v[0];
    Ok(Splitting { h0, h1, difference_residual: diff, pi_h0: pi(h0), pi_h1: pi(h1) })
}

/// Two origin-centred circles separating the singularities of `∂f/∂μ` inside
/// the unit circle from those outside it.
pub fn default_split_contours(kernel: &Kernel, x: &[f64; 3]) -> Result<(Contour, Contour)> {
    let sing = singularities(kernel, x, Integrand::MuDerivative, 1)?;
    let mut inner = 0.0f64;
    let mut outer = f64::INFINITY;
    for s in sing.all().into_iter().flatten() {
        let m = s.norm();
        if (m - 1.0).abs() < 1e-6 {
            return Err(Error::Contour(format!("singularity {s} lies on the unit circle")));
        }
        if m < 1.0 {
            inner = inner.max(m);
        } else {
            outer = outer.min(m);
        }
    }
    let r1 = if inner == 0.0 { 0.5 } else { inner.sqrt() };
    let r0 = if outer.is_finite() { outer.sqrt() } else { 2.0 };
    Ok((Contour::circle(c(0.0, 0.0), r0)?, Contour::circle(c(0.0, 0.0), r1)?))
}

/// Φ with its monopole pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiMatrix {
    pub components: [[C64; 2]; 2],
    pub vhat: C64,
    pub a: [C64; 3],
}

/// `Φ_BC = ∮ ρ_B ι_C/(ρ·ι) ∂f/∂μ ρ·dρ` with `ρ = (λ, 1)`, `ι = (1, 0)`,
/// `ρ·ι = −1`, `ρ·dρ = dλ`, so that `Φ = −[[∮gλ, 0], [∮g, 0]]` with
/// `g = ∂f/∂μ`. Then `V̂ = Φ₀₁ − Φ₁₀ = ∮g` and
/// `A = (−iΦ₀₀, −Φ₀₀, iΦ₁₀) = ∮ g (iλ, λ, −i) dλ` satisfy `∇×A = ∇V̂`.
pub fn phi_matrix(kernel: &Kernel, x: &[f64; 3], tc: &TwistorContour) -> Result<PhiMatrix> {
    require_kind(kernel, KernelKind::WeightZero)?;
    check_clearance(&singularities(kernel, x, Integrand::MuDerivative, 1)?, tc)?;
    let g = |l: C64| kernel.d_mu(l, incidence_mu(x, l));
    let m0 = tc.integrate(|l| g(l) * l)?;
    let m1 = tc.integrate(g)?;
    let i = C64::i();
    let zero = c(0.0, 0.0);
    let components = [[-m0, zero], [-m1, zero]];
    let vhat = components[0][1] - components[1][0];
    let a = [-i * components[0][0], -components[0][0], i * components[1][0]];
    Ok(PhiMatrix { components, vhat, a })
}

fn split(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// `max |∇×A − ∇V̂|` by finite differences, re-placing the automatic contour
/// at every stencil point.
pub fn monopole_residual(kernel: &Kernel, x: &[f64; 3], scheme: &FdScheme) -> Result<f64> {
    let field = |p: &[f64]| -> Result<Vec<f64>> {
        let q = [p[0], p[1], p[2]];
        let tc = auto_contour(kernel, &q)?;
        let phi = phi_matrix(kernel, &q, &tc)?;
        let mut out = Vec::with_capacity(8);
        out.extend(split(phi.vhat));
        for comp in phi.a {
            out.extend(split(comp));
        }
        Ok(out)
    };
    let jac = fd_jacobian_vec(field, x, scheme)?;
    // rows: 0,1 = V̂ (re, im); 2 + 2k, 3 + 2k = A_k
    let mut worst = 0.0f64;
    for part in 0..2 {
        let d = |row: usize, col: usize| jac[(row + part, col)];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let curl = d(2 + 2 * k, j) - d(2 + 2 * j, k);
            worst = worst.max((curl - d(0, i)).abs());
        }
    }
    Ok(worst)
}

/// FD Laplacian of the real and imaginary parts of the Penrose transform.
pub fn transform_laplacian(kernel: &Kernel, x: &[f64; 3], scheme: &FdScheme) -> Result<C64> {
    let value = |p: &[f64]| {
        let q = [p[0], p[1], p[2]];
        penrose_transform(kernel, &q, &auto_contour(kernel, &q)?)
    };
    let re = fd_laplacian(|p: &[f64]| value(p).map(|v| v.re), x, scheme)?;
    let im = fd_laplacian(|p: &[f64]| value(p).map(|v| v.im), x, scheme)?;
    Ok(c(re, im))
}

/// Change of `ln μ(λ)` once around the contour (continuity-tracked), in units
/// of `2πi`: the number of roots of `μ` the contour winds around.
pub fn log_winding(x: &[f64; 3], tc: &TwistorContour) -> f64 {
    let nodes = 1024;
    let circle = tc.circle;
    let at = |k: usize| {
        let t = circle.center() + circle.radius() * C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        let l = match tc.chart {
            Chart::Lambda => t,
            Chart::Inverted => 1.0 / t,
        };
        // in the inverted chart use μ̃ = λ̃² μ, which has the roots as zeros
        match tc.chart {
            Chart::Lambda => incidence_mu(x, l),
            Chart::Inverted => incidence_mu(x, l) * t * t,
        }
    };
    let mut log = TrackedLog::new(at(0));
    let start = log.value();
    for k in 1..=nodes {
        log.next(at(k % nodes));
    }
    ((log.value() - start) / (2.0 * PI * C64::i())).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_examples() {
        assert_eq!(incidence_mu(&[0.0, 0.0, 0.0], c(0.3, 0.2)), c(0.0, 0.0));
        assert_eq!(incidence_mu(&[1.0, 0.0, 0.0], c(0.0, 0.0)), c(1.0, 0.0));
        let l = c(0.7, -0.1);
        assert_eq!(incidence_mu(&[0.0, 0.0, 2.0], l), l * 4.0);
        let roots = section_roots(&[0.0, 0.0, 2.0]).unwrap();
        assert_eq!(roots.plus, None);
        assert_eq!(roots.minus, Some(c(0.0, 0.0)));
        let x = [0.3, -0.7, 1.1];
        let roots = section_roots(&x).unwrap();
        for z in [roots.plus.unwrap(), roots.minus.unwrap()] {
            assert!(incidence_mu(&x, z).norm() < 1e-14);
        }
    }

    #[test]
    fn inverse_mu_on_axis() {
        let x = [0.0, 0.0, 2.0];
        let tc = auto_contour(&Kernel::InvMu, &x).unwrap();
        assert_eq!(tc.chart, Chart::Inverted);
        let v = penrose_transform(&Kernel::InvMu, &x, &tc).unwrap();
        assert!((v - c(0.0, -PI / 2.0)).norm() < 1e-12, "{v}");
        let vh = dilation_transform(&Kernel::InvMu, &x, &tc).unwrap();
        assert!((vh - c(0.0, PI / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_mu_generic_points() {
        for x in [[0.3f64, -0.7, 1.1], [1.0, 2.0, -0.5], [-0.4, 0.1, 0.0], [0.0, 0.0, -1.5]] {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let tc = auto_contour(&Kernel::InvMu, &x).unwrap();
            let v = penrose_transform(&Kernel::InvMu, &x, &tc).unwrap();
            assert!((v * r + c(0.0, PI)).norm() < 1e-10, "{x:?} {v}");
        }
    }

    #[test]
    fn analytic_kernel_gives_zero() {
        let poly = Kernel::Rational {
            numerator: vec![[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]],
            mu_power: 0,
            lambda_poles: vec![],
            kind: KernelKind::WeightMinusTwo,
        };
        let x = [0.5, 0.5, 0.5];
        let tc = auto_contour(&poly, &x).unwrap();
        // λ² grows at infinity but the origin-centred circle sees no singularity
        assert!(penrose_transform(&poly, &x, &tc).unwrap().norm() < 1e-12);
    }

    #[test]
    fn mu_derivative_cross_check() {
        let kernels = [
            Kernel::InvMu,
            Kernel::NegLogMu,
            Kernel::MuOverLambda,
            Kernel::Rational {
                numerator: vec![[0.5, 0.0], [0.0, 1.0]],
                mu_power: 2,
                lambda_poles: vec![[0.2, 0.1]],
                kind: KernelKind::WeightMinusTwo,
            },
        ];
        let (l, mu) = (c(0.4, -0.3), c(1.3, 0.6));
        for k in &kernels {
            let num = k.d_mu_numeric(l, mu).unwrap();
            assert!((num - k.d_mu(l, mu)).norm() < 1e-10, "{k:?}");
        }
        // μ ∂F/∂μ = ∂f/∂μ for the pair (1/μ, −ln μ)
        assert!((mu * Kernel::InvMu.d_mu(l, mu) - Kernel::NegLogMu.d_mu(l, mu)).norm() < 1e-15);
    }

    #[test]
    fn kernel_json() {
        let k = Kernel::from_json(r#"{"name":"inv-mu"}"#).unwrap();
        assert_eq!(k, Kernel::InvMu);
        let k = Kernel::from_json(
            r#"{"name":"rational","numerator":[[1,0]],"mu_power":1,"kind":"F"}"#,
        )
        .unwrap();
        let x = [0.2, 0.3, 0.9];
        let r = (0.04f64 + 0.09 + 0.81).sqrt();
        let v = penrose_transform(&k, &x, &auto_contour(&k, &x).unwrap()).unwrap();
        assert!((v * r + c(0.0, PI)).norm() < 1e-10);
        assert!(Kernel::from_json(r#"{"name":"nope"}"#).is_err());
    }

    #[test]
    fn contour_collision_is_reported() {
        let x = [0.3, -0.7, 1.1];
        let lp = section_roots(&x).unwrap().plus.unwrap();
        let tc = TwistorContour::lambda(lp + 0.5, 0.5).unwrap();
        let err = penrose_transform(&Kernel::InvMu, &x, &tc).unwrap_err();
        assert!(matches!(err, Error::Contour(_)));
    }

    #[test]
    fn splitting_and_phi() {
        let x = [0.4, -0.2, 0.9];
        let k = Kernel::NegLogMu;
        let (outer, inner) = default_split_contours(&k, &x).unwrap();
        let mut pis = Vec::new();
        for th in [0.1, 1.3, 2.2, 3.9, 5.5] {
            let l = C64::from_polar(1.0, th);
            let s = splitting(&k, &x, l, (&outer, &inner)).unwrap();
            assert!(s.difference_residual < 1e-8);
            pis.push(s.pi_h0);
        }
        for p in &pis {
            assert!((p - pis[0]).norm() < 1e-8);
        }
        let zero = Kernel::Zero { kind: KernelKind::WeightZero };
        let s = splitting(&zero, &x, c(1.0, 0.0), (&outer, &inner)).unwrap();
        assert_eq!(s.h0, [c(0.0, 0.0); 2]);

        let r = (0.16f64 + 0.04 + 0.81).sqrt();
        let phi = phi_matrix(&k, &x, &auto_contour(&k, &x).unwrap()).unwrap();
        assert!((phi.vhat - c(0.0, PI / r)).norm() < 1e-10);
        let phi = phi_matrix(&Kernel::MuOverLambda, &x, &auto_contour(&Kernel::MuOverLambda, &x).unwrap())
            .unwrap();
        assert!((phi.vhat - c(0.0, 2.0 * PI)).norm() < 1e-12);
        let phi = phi_matrix(&zero, &x, &auto_contour(&zero, &x).unwrap()).unwrap();
        assert_eq!(phi.vhat, c(0.0, 0.0));
    }

    #[test]
    fn monopole_equation() {
        let s = FdScheme::default();
        for x in [[0.4, -0.2, 0.9], [1.0, 0.5, -0.3], [0.0, 0.0, 2.0]] {
            let r = monopole_residual(&Kernel::NegLogMu, &x, &s).unwrap();
            assert!(r < 1e-5, "{x:?} {r}");
        }
        assert!(monopole_residual(&Kernel::MuOverLambda, &[0.4, 0.2, 0.1], &s).unwrap() < 1e-8);
    }

    #[test]
    fn winding_counts_enclosed_roots() {
        let x = [0.3, -0.7, 1.1];
        let tc = auto_contour(&Kernel::InvMu, &x).unwrap();
        assert!((log_winding(&x, &tc).abs() - 1.0).abs() < 1e-9);
    }
}
