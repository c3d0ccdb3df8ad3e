//! Central finite differences with optional Richardson extrapolation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Step, stencil order and extrapolation switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdScheme {
    step: f64,
    order: u32,
    richardson: bool,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self { step: 1e-4, order: 2, richardson: true }
    }
}

impl FdScheme {
    pub fn new(step: f64, order: u32, richardson: bool) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Configuration(format!("FD step must be positive, got {step}")));
        }
        if order != 2 && order != 4 {
            return Err(Error::Configuration(format!("FD order must be 2 or 4, got {order}")));
        }
        Ok(Self { step, order, richardson })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// The step actually used: the power of two nearest to `step`, so that
    /// stencil offsets `x ± k h` are exact in binary floating point.
    pub fn effective_step(&self) -> f64 {
        2f64.powi(self.step.log2().round() as i32)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn richardson(&self) -> bool {
        self.richardson
    }

    pub fn with_step(self, step: f64) -> Result<Self> {
        Self::new(step, self.order, self.richardson)
    }

    /// Largest coordinate offset any stencil point reaches.
    pub fn reach(&self) -> f64 {
        let k = if self.order == 4 { 2.0 } else { 1.0 };
        k * self.effective_step()
    }

    fn first_weights(&self) -> &'static [(i32, f64)] {
        if self.order == 4 {
            &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)]
        } else {
            &[(-1, -0.5), (1, 0.5)]
        }
    }

    fn second_weights(&self) -> &'static [(i32, f64)] {
        if self.order == 4 {
            &[
                (-2, -1.0 / 12.0),
                (-1, 16.0 / 12.0),
                (0, -30.0 / 12.0),
                (1, 16.0 / 12.0),
                (2, -1.0 / 12.0),
            ]
        } else {
            &[(-1, 1.0), (0, -2.0), (1, 1.0)]
        }
    }

    /// Applies `raw` at step h (and h/2 with Richardson) and extrapolates.
    fn extrapolate<T, F>(&self, raw: F) -> Result<T>
    where
        F: Fn(f64) -> Result<T>,
        T: Combine,
    {
        let h = self.effective_step();
        let coarse = raw(h)?;
        if !self.richardson {
            return Ok(coarse);
        }
        let fine = raw(0.5 * h)?;
        let k = 2f64.powi(self.order as i32);
        Ok(T::combine(&fine, &coarse, k / (k - 1.0), -1.0 / (k - 1.0)))
    }
}

trait Combine {
    fn combine(a: &Self, b: &Self, wa: f64, wb: f64) -> Self;
}

impl Combine for DMatrix<f64> {
    fn combine(a: &Self, b: &Self, wa: f64, wb: f64) -> Self {
        a * wa + b * wb
    }
}

impl Combine for Vec<f64> {
    fn combine(a: &Self, b: &Self, wa: f64, wb: f64) -> Self {
        a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
    }
}

/// Gradient, Laplacian and Hessian of a scalar field.
#[derive(Debug, Clone)]
pub struct FdDerivatives {
    pub gradient: Vec<f64>,
    pub laplacian: f64,
    pub hessian: DMatrix<f64>,
}

fn eval_at<F>(field: &F, p: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    field(p).map_err(|e| Error::Stencil { at: p.to_vec(), source: Box::new(e) })
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = x.to_vec();
    for &(i, d) in moves {
        p[i] += d;
    }
    p
}

fn axpy(acc: &mut [f64], w: f64, v: &[f64]) -> Result<()> {
    if acc.len() != v.len() {
        return Err(Error::NumericalFailure("field changed output length inside stencil".into()));
    }
    for (a, b) in acc.iter_mut().zip(v) {
        *a += w * b;
    }
    Ok(())
}

/// Jacobian `J[(k, j)] = ∂f_k/∂x_j` of a vector field.
pub fn fd_jacobian_vec<F>(field: F, x: &[f64], scheme: &FdScheme) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = eval_at(&field, x)?.len();
    let n = x.len();
    scheme.extrapolate(|h| {
        let mut jac = DMatrix::zeros(m, n);
        for j in 0..n {
            let mut col = vec![0.0; m];
            for &(k, w) in scheme.first_weights() {
                let v = eval_at(&field, &shifted(x, &[(j, k as f64 * h)]))?;
                axpy(&mut col, w / h, &v)?;
            }
            for (r, c) in col.into_iter().enumerate() {
                jac[(r, j)] = c;
            }
        }
        Ok(jac)
    })
}

/// Derivative of a vector field along one coordinate direction.
pub fn fd_partial_vec<F>(field: F, x: &[f64], axis: usize, scheme: &FdScheme) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    scheme.extrapolate(|h| {
        let mut col: Vec<f64> = Vec::new();
        for &(k, w) in scheme.first_weights() {
            let v = eval_at(&field, &shifted(x, &[(axis, k as f64 * h)]))?;
            if col.is_empty() {
                col = vec![0.0; v.len()];
            }
            axpy(&mut col, w / h, &v)?;
        }
        Ok(col)
    })
}

fn lift<F>(field: F) -> impl Fn(&[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    move |p: &[f64]| field(p).map(|v| vec![v])
}

pub fn fd_gradient<F>(field: F, x: &[f64], scheme: &FdScheme) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let jac = fd_jacobian_vec(lift(field), x, scheme)?;
    Ok(jac.row(0).iter().copied().collect())
}

pub fn fd_hessian<F>(field: F, x: &[f64], scheme: &FdScheme) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let f = lift(field);
    let n = x.len();
    scheme.extrapolate(|h| {
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut acc = [0.0];
            for &(k, w) in scheme.second_weights() {
                let v = eval_at(&f, &shifted(x, &[(i, k as f64 * h)]))?;
                axpy(&mut acc, w / (h * h), &v)?;
            }
            hess[(i, i)] = acc[0];
            for j in 0..i {
                let mut acc = [0.0];
                for &(ki, wi) in scheme.first_weights() {
                    for &(kj, wj) in scheme.first_weights() {
                        let p = shifted(x, &[(i, ki as f64 * h), (j, kj as f64 * h)]);
                        let v = eval_at(&f, &p)?;
                        axpy(&mut acc, wi * wj / (h * h), &v)?;
                    }
                }
                hess[(i, j)] = acc[0];
                hess[(j, i)] = acc[0];
            }
        }
        Ok(hess)
    })
}

/// Laplacian from the diagonal second differences only.
pub fn fd_laplacian<F>(field: F, x: &[f64], scheme: &FdScheme) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let f = lift(field);
    let n = x.len();
    let lap = scheme.extrapolate(|h| {
        let mut acc = vec![0.0];
        for i in 0..n {
            for &(k, w) in scheme.second_weights() {
                let v = eval_at(&f, &shifted(x, &[(i, k as f64 * h)]))?;
                axpy(&mut acc, w / (h * h), &v)?;
            }
        }
        Ok(acc)
    })?;
    Ok(lap[0])
}

pub fn fd_derivatives<F>(field: F, x: &[f64], scheme: &FdScheme) -> Result<FdDerivatives>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let gradient = fd_gradient(&field, x, scheme)?;
    let hessian = fd_hessian(&field, x, scheme)?;
    let laplacian = hessian.trace();
    Ok(FdDerivatives { gradient, laplacian, hessian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r2(p: &[f64]) -> Result<f64> {
        Ok(p.iter().map(|v| v * v).sum())
    }

    #[test]
    fn r_squared() {
        let d = fd_derivatives(r2, &[1.0, 1.0, 1.0], &FdScheme::default()).unwrap();
        assert!((d.laplacian - 6.0).abs() < 1e-6);
        for g in &d.gradient {
            assert!((g - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn harmonic_polynomial() {
        let f = |p: &[f64]| Ok(p[0] * p[0] - p[1] * p[1]);
        for x in [[0.3, -1.2], [5.0, 2.0], [0.0, 0.0]] {
            let lap = fd_laplacian(f, &x, &FdScheme::default()).unwrap();
            assert!(lap.abs() < 1e-8, "{lap}");
        }
    }

    #[test]
    fn newtonian_potential() {
        let f = |p: &[f64]| Ok(1.0 / r2(p)?.sqrt());
        let d = fd_derivatives(f, &[0.0, 0.0, 2.0], &FdScheme::default()).unwrap();
        assert!(d.laplacian.abs() < 1e-6);
        assert!(d.gradient[0].abs() < 1e-10);
        assert!((d.gradient[2] + 0.25).abs() < 1e-9);
    }

    #[test]
    fn stencil_failure_carries_location() {
        let f = |p: &[f64]| {
            if p[0] > 1.0 {
                Err(Error::Domain("x > 1".into()))
            } else {
                Ok(p[0])
            }
        };
        let err = fd_gradient(f, &[1.0], &FdScheme::default()).unwrap_err();
        match err {
            Error::Stencil { at, .. } => assert!(at[0] > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_schemes() {
        assert!(FdScheme::new(0.0, 2, true).is_err());
        assert!(FdScheme::new(1e-3, 3, true).is_err());
    }

    proptest! {
        // cubic polynomials: order-2 Richardson and order-4 stencils are exact up to rounding
        #[test]
        fn polynomial_exactness(c in proptest::collection::vec(-2.0f64..2.0, 10),
                                x in -1.0f64..1.0, y in -1.0f64..1.0, order in prop_oneof![Just(2u32), Just(4u32)]) {
            let f = |p: &[f64]| {
                let (a, b) = (p[0], p[1]);
                Ok(c[0] + c[1]*a + c[2]*b + c[3]*a*a + c[4]*a*b + c[5]*b*b
                    + c[6]*a*a*a + c[7]*a*a*b + c[8]*a*b*b + c[9]*b*b*b)
            };
            let scheme = FdScheme::new(1e-2, order, true).unwrap();
            let d = fd_derivatives(f, &[x, y], &scheme).unwrap();
            let gx = c[1] + 2.0*c[3]*x + c[4]*y + 3.0*c[6]*x*x + 2.0*c[7]*x*y + c[8]*y*y;
            let gy = c[2] + c[4]*x + 2.0*c[5]*y + c[7]*x*x + 2.0*c[8]*x*y + 3.0*c[9]*y*y;
            let hxx = 2.0*c[3] + 6.0*c[6]*x + 2.0*c[7]*y;
            let hxy = c[4] + 2.0*c[7]*x + 2.0*c[8]*y;
            let hyy = 2.0*c[5] + 2.0*c[8]*x + 6.0*c[9]*y;
            let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
            prop_assert!(rel(d.gradient[0], gx) < 1e-9);
            prop_assert!(rel(d.gradient[1], gy) < 1e-9);
            prop_assert!(rel(d.hessian[(0,0)], hxx) < 1e-9);
            prop_assert!(rel(d.hessian[(0,1)], hxy) < 1e-9);
            prop_assert!(rel(d.hessian[(1,1)], hyy) < 1e-9);
        }
    }
}
