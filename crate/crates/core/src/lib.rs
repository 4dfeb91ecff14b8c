//! Monge-Ampere eigenvalue solver on convex planar domains.

// `!(x > 0.0)` deliberately rejects NaN alongside nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod fem;
pub mod hessian;
pub mod mesh;
pub mod oracle;
pub mod psd;
pub mod solver;

pub use error::{Error, Result};
