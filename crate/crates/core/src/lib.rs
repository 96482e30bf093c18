//! Boundary-control wave model of the Sturm–Liouville operator
//! `-y'' + q y` on the half-line.
//!
//! The crate covers forward waves under boundary control, the transmutation
//! kernel and exact controllability, the interval-set lattice that indexes
//! the wave spectrum, the coordinate wave model, and reconstruction of `q`
//! from a discrete spectral measure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod inverse;
pub mod io;
pub mod model;
pub mod potential;
pub mod sets;
pub mod sl;
pub mod spectral;
pub mod wave;

pub use error::{BcError, Result};
pub use potential::Potential;
