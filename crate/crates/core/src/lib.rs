//! Casimir-Polder potentials of antihydrogen above perfect, silicon and
//! silica mirrors (bulk or thin slab), and quantum reflection from them with
//! a fully absorbing wall.
//!
//! All quantities are in atomic units unless stated otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod badlands;
pub mod cp_potential;
pub mod error;
pub mod ode;
pub mod optics;
pub mod qreflect;
pub mod quad;
pub mod specfun;
pub mod threshold;
pub mod units;

pub use error::{Error, Result};
pub use units::Constants;
