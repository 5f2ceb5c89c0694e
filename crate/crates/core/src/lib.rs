//! General piecewise-deterministic Markov processes built from their
//! characteristic triple (flow, conditional hazard, jump kernel).

// Negated comparisons double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod generator;
pub mod models;
pub mod pdmp;
pub mod quadrature;
pub mod rng;
pub mod sds;
pub mod stieltjes;
pub mod value;

pub use error::{Error, Result};
