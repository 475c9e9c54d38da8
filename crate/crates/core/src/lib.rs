//! Privacy accounting with privacy profiles, privacy loss distributions and
//! Rényi curves, linked through bilateral Laplace transforms.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod composition;
pub mod core;
pub mod error;
pub mod mechanisms;
pub mod oracle;
pub mod laplace;
pub mod normal;
pub mod quad;
pub mod spec;
pub mod subsampling;
pub mod verify;

pub use crate::error::{Error, Result};
