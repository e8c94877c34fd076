#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Dynamical invariants, biorthogonal spectral bases and geometric phases for
//! two-level open quantum systems in the Hilbert-Schmidt representation.

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod invariant;
pub mod matrix;
pub mod ode;
pub mod phase;
pub mod quadrature;
pub mod robustness;
pub mod spectral;
pub mod superop;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use matrix::{CMatrix, C64};
