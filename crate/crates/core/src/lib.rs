//! Cooling ramps of Kitaev wires coupled to Markovian thermal baths.

// Negated comparisons reject NaN; reference constants keep all their digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic;
pub mod bath;
pub mod cli;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod kernel;
pub mod model;
pub mod ode;
pub mod presets;
pub mod quadrature;
pub mod ramp;
pub mod scaling;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
