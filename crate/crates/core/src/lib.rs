//! Simulation of finite-dimensional quantum systems driven by classical
//! Poisson white noise.
//!
//! The noise is a train of delta kicks `exp(-iξH₁)` at Poisson times. Its
//! average obeys the master equation `ρ̇ = L0(ρ) + L1(ρ)`, which this crate
//! builds, integrates, approximates in the weak and strong noise regimes, and
//! checks against explicit stochastic trajectories.

// Negated comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod error;
pub mod liouvillian;
pub mod noise;
pub mod propagate;
pub mod qcore;
pub mod schemes;
pub mod trajectories;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};
