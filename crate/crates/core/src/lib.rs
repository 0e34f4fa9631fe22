//! Numerical study of fractional porous medium flow
//! `∂ₜu + (-Δ)^s(u^m) = 0` on rotationally symmetric model manifolds.
//!
//! Radial problems are discretized with a cell-centred finite volume grid;
//! fractional powers and the heat semigroup are evaluated exactly on the
//! discrete spectrum, and the nonlinear flow is advanced by implicit Euler.

pub mod datum;
pub mod error;
pub mod estimates;
pub mod fit;
pub mod green;
pub mod manifold;
pub mod quadrature;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
