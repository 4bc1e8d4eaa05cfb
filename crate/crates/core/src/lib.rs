//! Numerical laboratory for type II blowup of the six-dimensional
//! energy-critical heat equation `u_t = Δu + |u|u`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cutoff;
pub mod energy;
pub mod error;
pub mod evolver;
pub mod grid;
pub mod ground_state;
pub mod numerics;
pub mod profile;
pub mod selfsimilar;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{GridSpec, RadialFunction};
