//! Simulation core for noisy parameterized circuits with mid-circuit resets.
//!
//! `no_std` with `alloc`. Every stochastic routine takes an explicit RNG.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod channels;
pub mod circuit;
pub mod entropy;
pub mod ensembles;
pub mod error;
pub mod gradients;
pub mod kernels;
pub mod lattice;
pub mod linalg;
pub mod pauli;
pub mod state;
pub mod steady_state;
pub mod toric;
pub mod variance;
pub mod vwc;

pub use error::{Error, Result};
