//! A desk-scale laboratory for stochastic Polyak step sizes.
//!
//! The crate implements the idealized stochastic Polyak step size (`SPS*`),
//! its clipped and dampened practical variants, the iterate-averaging
//! momentum form (`IAM`, plus an Adam-preconditioned `IAM-Adam`), and SGD
//! baselines, all as pure state transitions over synthetic convex finite-sum
//! problems with analytic gradients and known solutions.
//!
//! On top of the optimizers sits a verification harness: closed-form rate
//! certificates built from problem constants, path-wise monotonicity
//! checkers, numeric oracles for the supporting inequalities, and a
//! configuration-driven experiment runner that emits reproducible CSV
//! trajectories.

pub mod analysis;
mod error;
pub mod harness;
pub mod optim;
pub mod problems;
pub mod record;
pub mod rng;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;

/// Dense parameter vector; holds iterates, gradients and solutions.
pub type ParamVector = nalgebra::DVector<f64>;

pub type Result<T> = std::result::Result<T, Error>;
