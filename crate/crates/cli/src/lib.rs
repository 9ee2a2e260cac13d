//! Campaign runner for the modular sequence space toolkit.

// `!(a > b)` is how validation rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod config;
pub mod output;
