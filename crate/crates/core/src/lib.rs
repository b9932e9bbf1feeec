//! Discrete-time quantum walks on the square, honeycomb and triangular
//! lattices, a spectral solver for the (2+1)-dimensional Dirac equation
//! they approach as `ε → 0`, and the tooling that measures the approach.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`).
//! The τ solver, the analysis layer and the command-line driver work in
//! `f64`.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod dirac;
pub mod error;
pub mod io;
pub mod lattice;
pub mod scalar;
pub mod spin;
pub mod tau_solver;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use walk::{StepOperator, WalkKind};

pub type Spinor64 = spin::Spinor<f64>;
pub type Spinor32 = spin::Spinor<f32>;
pub type Matrix64 = spin::Matrix2<f64>;
pub type Matrix32 = spin::Matrix2<f32>;
pub type Field64 = lattice::BravaisField<f64>;
pub type Field32 = lattice::BravaisField<f32>;
pub type TriangularField64 = lattice::TriangularField<f64>;
pub type TriangularField32 = lattice::TriangularField<f32>;
pub type WalkParams64 = spin::WalkParams<f64>;
pub type WalkParams32 = spin::WalkParams<f32>;
pub type StepOperator64 = walk::StepOperator<f64>;
pub type StepOperator32 = walk::StepOperator<f32>;
