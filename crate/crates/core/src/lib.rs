#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod chimney;
pub mod cli;
pub mod error;
pub mod klein;
pub mod orthospectrum;
pub mod poincare;
pub mod quad;
pub mod report;
pub mod search;
pub mod shadows;
pub mod specfun;
pub mod sum;

pub use error::{Error, Result};
