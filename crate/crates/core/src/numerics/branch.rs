//! Continuity-tracked branches of multivalued complex functions.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Square root that follows a path: each new value is the root closest to the
/// previous one, so branch cuts of the principal root are never crossed blindly.
#[derive(Debug, Clone, Copy)]
pub struct TrackedSqrt {
    last: Complex64,
}

impl TrackedSqrt {
    /// Starts from the principal root of `z0`.
    pub fn new(z0: Complex64) -> Self {
        Self { last: z0.sqrt() }
    }

    /// Starts from a prescribed root.
    pub fn with_value(root: Complex64) -> Self {
        Self { last: root }
    }

    pub fn value(&self) -> Complex64 {
        self.last
    }

    pub fn next(&mut self, z: Complex64) -> Complex64 {
        let r = z.sqrt();
        self.last = if (r - self.last).norm() <= (-r - self.last).norm() { r } else { -r };
        self.last
    }
}

/// Logarithm unwrapped along a path by multiples of 2πi.
#[derive(Debug, Clone, Copy)]
pub struct TrackedLog {
    last: Complex64,
}

impl TrackedLog {
    pub fn new(z0: Complex64) -> Self {
        Self { last: z0.ln() }
    }

    pub fn value(&self) -> Complex64 {
        self.last
    }

    pub fn next(&mut self, z: Complex64) -> Complex64 {
        let mut v = z.ln();
        let turns = ((self.last.im - v.im) / (2.0 * PI)).round();
        v.im += 2.0 * PI * turns;
        self.last = v;
        v
    }
}

/// Square root of `target` continued along the straight segment from `start`,
/// beginning at the root `root_at_start`.
pub fn sqrt_along_segment(
    g: impl Fn(Complex64) -> Complex64,
    start: Complex64,
    root_at_start: Complex64,
    end: Complex64,
    steps: usize,
) -> Complex64 {
    let mut tracker = TrackedSqrt::with_value(root_at_start);
    for k in 1..=steps.max(1) {
        let t = k as f64 / steps.max(1) as f64;
        tracker.next(g(start + (end - start) * t));
    }
    tracker.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_continues_across_the_negative_axis() {
        let mut tr = TrackedSqrt::new(Complex64::new(1.0, 0.0));
        let n = 400;
        for k in 1..=n {
            let th = 2.0 * PI * k as f64 / n as f64;
            tr.next(Complex64::from_polar(1.0, th));
        }
        // one full turn flips the sign of the root
        assert!((tr.value() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn log_winds() {
        let mut tr = TrackedLog::new(Complex64::new(2.0, 0.0));
        for k in 1..=64 {
            tr.next(Complex64::from_polar(2.0, 2.0 * PI * k as f64 / 64.0));
        }
        assert!((tr.value().im - 2.0 * PI).abs() < 1e-12);
        assert!((tr.value().re - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn segment_continuation_matches_principal_off_the_cut() {
        let g = |z: Complex64| z * z + 1.0;
        let z = Complex64::new(0.7, 2.0);
        let start = Complex64::new(3.0, 0.0);
        let v = sqrt_along_segment(g, start, g(start).sqrt(), z, 200);
        assert!((v * v - g(z)).norm() < 1e-12);
        assert!(v.re > 0.0);
    }
}
