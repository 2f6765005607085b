//! Rockafellian relaxation for stochastic elliptic optimal control problems
//! whose input distribution has been corrupted.
//!
//! The crate provides 1D finite-difference and 2D P1 finite-element state
//! solvers, the corrupted and relaxed objectives with adjoint gradients,
//! gradient/quasi-Newton optimizers, a bounded-variable simplex solver for the
//! sample-reweighting step, and an alternating driver tying them together.

pub mod adi;
pub mod elliptic_1d;
pub mod elliptic_2d;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod mesh;
pub mod motivating;
pub mod objectives;
pub mod optimizers;
pub mod quadrature;
pub mod random_field;

pub use error::{Error, Result};
