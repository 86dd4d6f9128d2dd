//! Two-stage variational circuit training over a dense simulator.

pub mod ansatz;
pub mod cli;
pub mod cloning;
pub mod diagnostics;
pub mod error;
pub mod loss;
pub mod optimizer;
pub mod qsim;
pub mod seed;

pub use error::{Error, Result};
