//! Command layer for the permutation constellation laboratory: SNR sweeps,
//! Monte Carlo runs, comparison curves and a verification suite, all
//! written as CSV or JSON with a digest manifest.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod args;
pub mod compare;
mod error;
pub mod grid;
pub mod info;
pub mod manifest;
pub mod simulate;
pub mod sweep;
pub mod table;
pub mod verify;

pub use args::run;
pub use error::{CliError, Result};
