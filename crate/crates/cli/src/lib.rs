//! Study harness and command-line front end for delampertized fBm
//! estimation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnose;
pub mod error;
pub mod estimate;
pub mod io;
pub mod landscape;
pub mod study;

pub use error::{CliError, Result};
