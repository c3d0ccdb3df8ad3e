//! Adaptive Gauss-Kronrod quadrature with endpoint and tail substitutions.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Upper integration limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Infinity,
}

const MAX_INTERVALS: usize = 4000;

// 15-point Kronrod abscissae (positive half, descending) and weights; the
// embedded 7-point Gauss rule uses the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7-K15 panel on `[a, b]`: returns the Kronrod value and `|K - G|`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive G7-K15 on a finite interval; bisects the panel with the
/// largest error estimate until the summed estimate drops below `tol`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gauss_kronrod(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    while total_err > tol {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::NumericalFailure(
                "integrand produced non-finite values".into(),
            ));
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::NumericalFailure(format!(
                "quadrature did not reach tolerance {tol:e} (estimate {total_err:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // panel cannot be split further in double precision
            return Err(Error::NumericalFailure(format!(
                "quadrature panel collapsed near {mid}"
            )));
        }
        let (v1, e1) = gauss_kronrod(f, worst.a, mid);
        let (v2, e2) = gauss_kronrod(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to drop accumulated cancellation from the running updates
    let sum: f64 = heap.iter().map(|p| p.value).sum();
    if !sum.is_finite() {
        return Err(Error::NumericalFailure("integrand produced non-finite values".into()));
    }
    Ok(sum)
}

/// Integral of `f` over `[a, b]` (or `[a, +inf)`) to absolute accuracy `tol`.
///
/// Finite intervals are mapped through the smoothstep `t = a + (b-a)(3v^2 - 2v^3)`,
/// which absorbs inverse-square-root endpoint singularities. The tail
/// `[a, inf)` is first mapped by `t = a - 1 + u^-2`, `u in (0, 1]`; integrands
/// decaying like `t^-p` then behave like `u^(2p-3)` near `u = 0`, integrable
/// for `p > 1`. Slower decay is reported as a divergence.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: Bound, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Configuration(format!("tolerance must be positive, got {tol}")));
    }
    if !a.is_finite() {
        return Err(Error::Configuration("lower limit must be finite".into()));
    }
    match b {
        Bound::Finite(b) => {
            if !b.is_finite() {
                return Err(Error::Configuration("use Bound::Infinity for an infinite limit".into()));
            }
            let len = b - a;
            let g = |v: f64| f(a + len * v * v * (3.0 - 2.0 * v)) * 6.0 * len * v * (1.0 - v);
            adaptive_gk(&g, 0.0, 1.0, tol)
        }
        Bound::Infinity => {
            check_tail_decay(&f, a)?;
            let tail = |u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let t = a - 1.0 + 1.0 / (u * u);
                f(t) * 2.0 / (u * u * u)
            };
            let g = |v: f64| tail(v * v * (3.0 - 2.0 * v)) * 6.0 * v * (1.0 - v);
            adaptive_gk(&g, 0.0, 1.0, tol)
        }
    }
}

/// Local power-law decay exponent of `|f|` at large arguments.
fn check_tail_decay<F: Fn(f64) -> f64>(f: &F, a: f64) -> Result<()> {
    let base = a.abs().max(1.0);
    let t1 = base * 1e6;
    let t2 = base * 1e8;
    let f1 = f(t1).abs();
    let f2 = f(t2).abs();
    if f1 == 0.0 && f2 == 0.0 {
        return Ok(());
    }
    if !(f1.is_finite() && f2.is_finite()) {
        return Err(Error::NumericalFailure("integrand not finite in the tail".into()));
    }
    let p = if f2 == 0.0 {
        f64::INFINITY
    } else {
        -(f2 / f1).ln() / (t2 / t1).ln()
    };
    if p < 1.02 {
        return Err(Error::Divergence(format!(
            "integrand decays like t^-{p:.3} at infinity"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_22() {
        let (v, _) = gauss_kronrod(&|x: f64| x.powi(22) + x.powi(3), 0.0, 1.0);
        assert!((v - (1.0 / 23.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn eguchi_hanson_tail_integral() {
        // antiderivative 2 artanh(1/sqrt(H)) gives ln 3 from H = 4
        let v = integrate_adaptive(|h| 1.0 / ((h - 1.0) * h.sqrt()), 4.0, Bound::Infinity, 1e-10)
            .unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-10, "{v}");
    }

    #[test]
    fn endpoint_singularity_and_zero() {
        let v = integrate_adaptive(|t| 1.0 / t.sqrt(), 0.0, Bound::Finite(1.0), 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let z = integrate_adaptive(|_| 0.0, 0.0, Bound::Finite(1.0), 1e-10).unwrap();
        assert_eq!(z, 0.0);
        let both = integrate_adaptive(
            |t| 1.0 / (t * (1.0 - t)).sqrt(),
            0.0,
            Bound::Finite(1.0),
            1e-10,
        )
        .unwrap();
        assert!((both - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn slow_tails_are_divergent() {
        let err = integrate_adaptive(|t| 1.0 / t, 1.0, Bound::Infinity, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
        let err = integrate_adaptive(|t| 1.0 / t.sqrt(), 1.0, Bound::Infinity, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn exponential_tail() {
        let v = integrate_adaptive(|t| (-t).exp(), 0.0, Bound::Infinity, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
