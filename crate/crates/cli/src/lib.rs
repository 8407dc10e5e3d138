//! Experiment runner for the `risqos` library: parameter sweeps, oracle
//! validation and SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod layout;
pub mod plot;
pub mod sweep;
pub mod validate;
