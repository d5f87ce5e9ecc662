//! Fractional heat semigroups, Lipschitz norms, wavelet lattices, bad sets
//! and distance proxies on periodic sampled functions.

// Negated comparisons reject NaN parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod badset;
pub mod ball_average;
pub mod cli;
pub mod config;
pub mod distance;
pub mod error;
pub mod families;
pub mod grid;
pub mod heat;
pub mod hyperbolic;
pub mod kernel;
pub mod lattice;
pub mod lipschitz;
pub mod quadrature;
pub mod selftest;
pub mod special;
pub mod wavelet;

pub use error::{Error, Result};
