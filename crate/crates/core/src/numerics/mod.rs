//! Shared numerical kernels.

pub mod branch;
pub mod contour;
pub mod fd;
pub mod ode;
pub mod poly;
pub mod quadrature;

pub use branch::{TrackedLog, TrackedSqrt};
pub use contour::{contour_integral, contour_integral_detailed, Contour, ContourValue};
pub use fd::{
    fd_derivatives, fd_gradient, fd_hessian, fd_jacobian_vec, fd_laplacian, fd_partial_vec,
    FdDerivatives, FdScheme,
};
pub use ode::{ode_solve, Trajectory};
pub use poly::{find_real_roots, Polynomial};
pub use quadrature::{integrate_adaptive, Bound};

/// Default tolerances inherited by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub quad: f64,
    pub ode: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quad: 1e-10, ode: 1e-10, fd_step: 1e-4 }
    }
}
