//! Moderate-deviation importance sampling for exit probabilities of
//! small-noise stochastic reaction–diffusion equations on an interval.
//!
//! The process is simulated in a truncated Laplacian eigenbasis. Starting at
//! a stable equilibrium `x*`, an estimator of the probability that
//! `η = (X − x*)/(√ε h(ε))` leaves the ball of radius `L` before time `T` is
//! built from a change of measure derived from the quasipotential of the
//! linearized dynamics.
//!
//! Modules are layered bottom-up: [`specfun`] and [`spectral`] provide the
//! eigen-data, [`model`] the reaction terms, [`control`] the changes of
//! measure, [`solver`] single trajectories, [`campaign`] Monte Carlo
//! aggregation, and [`variational`] the limiting deterministic problem.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod campaign;
pub mod control;
pub mod error;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod solver;
pub mod specfun;
pub mod spectral;
pub mod transform;
pub mod variational;

pub use error::{Error, Result};
