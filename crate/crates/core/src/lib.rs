//! Permutation signal constellations over the AWGN channel.
//!
//! A constellation is built from `q` blocks of `2K` coordinates; every block
//! carries one arrangement of `2K` equally spaced PAM levels, so a block
//! conveys `log2((2K)!)` bits. The crate provides:
//!
//! * [`numerics`]: Q-function, integer-shape incomplete gamma tail, log-factorial.
//! * [`scsh`]: closed-form model of sphere-packed (Shannon-type) constellations.
//! * [`scopt`]: the constructive permutation constellation and its codec.
//! * [`scopt_analytic`]: error-probability and energy-loss expressions for it.
//! * [`channel`]: seeded, parallel Monte Carlo simulation with three detectors.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
mod error;
pub mod numerics;
pub mod scopt;
pub mod scopt_analytic;
pub mod scsh;

pub use error::{Error, Result};
