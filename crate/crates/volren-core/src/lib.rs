//! CPU direct volume rendering with quantified sampling artifacts.
//!
//! This crate holds the algorithmic core of the renderer and depends only on
//! `alloc` and `libm`, so it builds without the standard library. File I/O,
//! parallel execution, benchmarking and the command line live in the
//! companion `volren` crate.
//!
//! The pipeline follows the classic emission-absorption model: rays are
//! marched through a [`volume::ScalarVolume`] in segments, each segment is
//! classified through a [`transfer::TransferFunction`] (optionally via a
//! pre-integrated table), and the resulting premultiplied colors are
//! composited front to back. The [`quality`] module renders finely sampled
//! oracle images and measures the classic sampling artifacts - onion rings,
//! star patterns, jerky edges - so that every remedy (opacity correction,
//! jitter, pre-integration, prefiltered tricubic reconstruction, partial
//! boundary segments, adaptive marching, mipmaps) is backed by a number.

#![cfg_attr(not(test), no_std)]
// validation guards use `!(x > 0.0)` so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod camera;
pub mod error;
pub mod interp;
pub mod math;
pub mod mipmap;
pub mod phantom;
pub mod quality;
pub mod raycast;
pub mod transfer;
pub mod volume;

pub use error::{Error, Result};
