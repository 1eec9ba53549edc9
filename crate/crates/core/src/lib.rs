//! Shallow ReLU^k ridge approximation on the unit ball.
//!
//! The crate builds shallow networks `Σ a_i σ_k((xᵀ,1)v_i)` for smooth targets
//! through a spherical-harmonic pipeline:
//!
//! 1. [`lift`] maps a target on the ball `B^d` to a parity-extended function on
//!    the sphere `S^d`.
//! 2. [`kernelize`] smooths it with a cutoff kernel and solves for the ridge
//!    density `φ` with `φ ∗ σ_k = g_m`, using the activation spectrum from
//!    [`harmonics`].
//! 3. [`network`] samples a finite network from `|φ|` and measures errors.
//!
//! [`cnn`] compiles shallow ReLU networks into sparse deep convolutional
//! networks that compute exactly the same function, and [`regression`]
//! runs the nonparametric regression experiments and rate predictions. The
//! [`cli`] module backs the `ridgeline` binary.

pub mod cli;
pub mod cnn;
pub mod error;
pub mod harmonics;
pub mod kernelize;
pub mod lift;
pub mod sampling;
pub mod network;
pub mod regression;
pub mod seeds;

pub use error::{Error, Result};
