//! Computational core for Kakeya sets in the first Heisenberg group.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`hgroup`]: group law, Korányi gauge and metric, dilations;
//! - [`hlines`]: horizontal lines and unit segments with their `(a, b, d, eps)` codes;
//! - [`setgen`]: exact point samplers and Kakeya code-family builders;
//! - [`dimest`]: greedy packing counts and log-log slope fitting;
//! - [`duality`]: the slice/projection geometry that turns plane sections
//!   of a set into Euclidean projections of its code set;
//! - [`experiments`]: projection sweeps, co-area checks and the
//!   end-to-end dimension-bound pipeline.
//!
//! File formats, threading and the command line live in the `heiskakeya`
//! companion crate.

#![no_std]
// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dimest;
pub mod duality;
mod error;
pub mod experiments;
pub(crate) mod fmath;
pub mod hgroup;
pub mod hlines;
pub mod rng;
pub mod setgen;

pub use error::{Error, Result};
pub use hgroup::HPoint;
pub use hlines::{Chart, CodeFamily, SegmentCode};
