//! Host-side toolkit around the `volren-core` renderer: raw volume and
//! image file formats, data-parallel execution, the benchmark harness and
//! the command-line interface.

// validation guards use `!(x > 0.0)` so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod digest;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::{Error, Result};
