//! Finite-dimensional quantum kernel and weak-value toolkit.
//!
//! The crate is `no_std` (it needs `alloc`) so that every numerical routine
//! can be embedded anywhere; IO, the command-line front end and thread-pool
//! parallelism live in the companion `weakval` crate.
//!
//! Layout:
//! - [`qkernel`]: state vectors, density matrices, operators, projection-valued
//!   measures, Born rule and collapse.
//! - [`weakvalue`]: weak values by the defining ratio and by exact weak-operator
//!   extraction.
//! - [`pointer`]: discretised 1-D pointer wavefunctions on a periodic grid.
//! - [`aav`]: the weak-measurement-plus-post-selection protocol, exact and
//!   Monte Carlo.
//! - [`scenarios`]: the Cheshire-cat projector pattern and the operational
//!   velocity of a weakly-then-strongly measured particle.
//! - [`selection_bias`]: classical post-selection demonstrations.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` style guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod aav;
mod error;
pub mod fft;
pub mod jobs;
pub mod pointer;
pub mod qkernel;
pub mod scenarios;
pub mod selection_bias;
pub mod stats;
pub mod weakvalue;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Default lower bound on `|<post|pre>|` below which a weak value is undefined.
pub const DEFAULT_OVERLAP_EPS: f64 = 1e-12;
