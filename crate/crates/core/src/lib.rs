//! Solvers for the reduced model of a magnetically insulated vacuum diode.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only numerics:
//!
//! - [`model`]: physical and reduced parameters, shared value types.
//! - [`cubic`]: closed-form and companion-matrix solvers for the deflection
//!   cubic `u³ + k̂u² + u + b̂ = 0` and the induced θ-equation.
//! - [`potential`]: the singular effective-potential equation
//!   `D'' = jₓ(6√D + 2/√D − 4γ)`, `D(0) = D'(0) = 0`.
//! - [`bvp`]: the two-potential system for `(u, v)`, free-boundary detection,
//!   shooting and Child–Langmuir bound checks.
//! - [`bifurcation`]: parameter sweeps over `(k̂, b̂)` and branch assembly.
//!
//! File formats, the CLI and parallel scans live in the `diode` crate.

#![no_std]
// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bifurcation;
pub mod bvp;
pub mod cubic;
mod error;
pub mod model;
pub mod ode;
pub mod potential;
mod series;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{ComplexValue, DiodeParams, ReducedParams};
pub use trajectory::Trajectory;
