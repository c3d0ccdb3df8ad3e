//! Harmonic functions constant on central quadrics and the geometry built on them.
//!
//! The crate evaluates the quadric-ansatz potential `V` and its companion
//! `V̂ = ∂V/∂C`, integrates the Euler and Nahm reductions, evaluates twistor
//! contour transforms, and checks the resulting Gibbons-Hawking and BGPP
//! metrics numerically.

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod quadric;
pub mod nahm;
pub mod twistor;
pub mod geometry;
pub mod suite;
pub mod cli;
