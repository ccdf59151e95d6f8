//! Outdoor microalgae raceway photobioreactor: plant model, stiff integrator,
//! baseline controllers, closed-loop simulation and benchmark scoring.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod evaluation;
pub mod integrator;
pub mod io;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
