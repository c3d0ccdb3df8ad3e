//! Dormand-Prince 5(4) integrator with cubic Hermite dense output.

use crate::error::{Error, Result};

/// Accepted steps of an integration, with derivatives for Hermite interpolation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Vec<f64>,
    states: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(grid: Vec<f64>, states: Vec<Vec<f64>>, derivs: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != states.len() || grid.len() != derivs.len() {
            return Err(Error::Configuration(
                "trajectory needs at least two nodes with matching states".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Configuration("trajectory grid must increase".into()));
        }
        Ok(Self { grid, states, derivs })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn derivs(&self) -> &[Vec<f64>] {
        &self.derivs
    }

    pub fn span(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().expect("non-empty grid"))
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (t0, t1) = self.span();
        if !(t >= t0 && t <= t1) {
            return Err(Error::Domain(format!("parameter {t} outside [{t0}, {t1}]")));
        }
        let idx = self.grid.partition_point(|&g| g <= t);
        Ok(idx.clamp(1, self.grid.len() - 1) - 1)
    }

    /// State at `t` by cubic Hermite interpolation between accepted steps.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.locate(t)?;
        let (ta, tb) = (self.grid[i], self.grid[i + 1]);
        let h = tb - ta;
        let u = (t - ta) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        Ok((0..self.states[i].len())
            .map(|k| {
                h00 * self.states[i][k]
                    + h10 * h * self.derivs[i][k]
                    + h01 * self.states[i + 1][k]
                    + h11 * h * self.derivs[i + 1][k]
            })
            .collect())
    }

    /// Derivative of the Hermite interpolant.
    pub fn eval_derivative(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.locate(t)?;
        let (ta, tb) = (self.grid[i], self.grid[i + 1]);
        let h = tb - ta;
        let u = (t - ta) / h;
        let d00 = 6.0 * u * (u - 1.0) / h;
        let d10 = (1.0 - u) * (1.0 - 3.0 * u);
        let d01 = -d00;
        let d11 = u * (3.0 * u - 2.0);
        Ok((0..self.states[i].len())
            .map(|k| {
                d00 * self.states[i][k]
                    + d10 * self.derivs[i][k]
                    + d01 * self.states[i + 1][k]
                    + d11 * self.derivs[i + 1][k]
            })
            .collect())
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MIN_NODES: f64 = 200.0;
const MAX_STEPS: usize = 2_000_000;

/// Integrates `y' = rhs(t, y)` over `span` with local error per step below
/// `tol * (1 + |y|)` in every component.
pub fn ode_solve<F>(mut rhs: F, y0: &[f64], span: (f64, f64), tol: f64) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let (t0, t1) = span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Configuration(format!("span must be increasing, got ({t0}, {t1})")));
    }
    if !(tol > 0.0) {
        return Err(Error::Configuration(format!("tolerance must be positive, got {tol}")));
    }
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f = rhs(t, &y)?;
    let mut grid = vec![t];
    let mut states = vec![y.clone()];
    let mut derivs = vec![f.clone()];

    let scale0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max) + 1.0;
    let fmax = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut h = if fmax > 0.0 { 0.01 * scale0 / fmax } else { 0.01 * (t1 - t0) };
    // cap keeps the cubic Hermite interpolant accurate between nodes
    let h_max = (t1 - t0) / MIN_NODES;
    h = h.min(h_max).max(1e-6 * (t1 - t0));
    let h_min = 1e-14 * (t1.abs().max(t0.abs()).max(1.0));

    let mut k = vec![vec![0.0; n]; 7];
    let mut attempts = 0usize;
    while t < t1 {
        attempts += 1;
        if attempts > MAX_STEPS {
            // stalled against a singular point of the right-hand side
            return Err(Error::Singularity { at: t, estimate: None });
        }
        if t + h > t1 {
            h = t1 - t;
        }
        if h < h_min {
            return Err(Error::Singularity { at: t, estimate: None });
        }
        k[0].clone_from(&f);
        let mut ok = true;
        for s in 1..7 {
            let ys: Vec<f64> = (0..n)
                .map(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                .collect();
            match rhs(t + C[s] * h, &ys) {
                Ok(v) if v.iter().all(|x| x.is_finite()) => k[s] = v,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            h *= 0.25;
            continue;
        }
        let y_new: Vec<f64> = (0..n)
            .map(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>())
            .collect();
        let err = (0..n)
            .map(|i| {
                let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                e.abs() / (tol * (1.0 + y[i].abs().max(y_new[i].abs())))
            })
            .fold(0.0, f64::max);
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            t = if t1 - (t + h) < h_min { t1 } else { t + h };
            y = y_new;
            // first-same-as-last: stage 7 is f(t + h, y_new)
            f = k[6].clone();
            grid.push(t);
            states.push(y.clone());
            derivs.push(f.clone());
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(h_max);
    }
    Trajectory::new(grid, states, derivs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential() {
        let tr = ode_solve(|_, y| Ok(vec![y[0]]), &[1.0], (0.0, 1.0), 1e-10).unwrap();
        assert!((tr.last()[0] - std::f64::consts::E).abs() < 1e-9);
        let mid = tr.eval(0.5).unwrap()[0];
        assert!((mid - 0.5f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn separable_euler_flow() {
        let rhs = |_: f64, w: &[f64]| Ok(vec![w[1] * w[2], w[0] * w[2], w[0] * w[1]]);
        let tr = ode_solve(rhs, &[1.0, 1.0, 1.0], (0.0, 0.5), 1e-12).unwrap();
        for v in tr.last() {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_flow() {
        let tr = ode_solve(|_, _| Ok(vec![0.0, 0.0]), &[3.0, -1.0], (0.0, 2.0), 1e-10).unwrap();
        assert_eq!(tr.last(), &[3.0, -1.0]);
        assert_eq!(tr.eval(1.3).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn blow_up_is_a_singularity() {
        let err = ode_solve(|_, y| Ok(vec![y[0] * y[0]]), &[1.0], (0.0, 2.0), 1e-10).unwrap_err();
        match err {
            Error::Singularity { at, .. } => assert!((at - 1.0).abs() < 1e-3, "{at}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hermite_derivative() {
        let tr = ode_solve(|t, _| Ok(vec![t.cos()]), &[0.0], (0.0, 3.0), 1e-11).unwrap();
        for t in [0.1, 1.7, 2.9] {
            assert!((tr.eval(t).unwrap()[0] - t.sin()).abs() < 1e-7);
            assert!((tr.eval_derivative(t).unwrap()[0] - t.cos()).abs() < 1e-5);
        }
        assert!(tr.eval(3.5).is_err());
    }
}
