//! File formats, parallel drivers and the `heiskakeya` command line on top
//! of [`heiskakeya_core`].
//!
//! Output files are written atomically and depend only on the command line
//! (including `--seed`), never on the thread count.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod formats;
pub mod parallel;

pub use heiskakeya_core as core;
