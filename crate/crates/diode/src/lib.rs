//! Command line, configuration files and data formats for the diode solvers.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod output;
pub mod par;
